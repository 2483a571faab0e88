//! N-Triples export of citations using CiTO terms.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};
use std::io::{self, Write};

use crate::index::{CitationIndex, CitationRecord, SelfCitationType};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const CITO: &str = "http://purl.org/spar/cito/";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const CITATION_BASE: &str = "https://w3id.org/oc/index/ci/";
/// CiTO has no institutional self-citation class; this one is minted locally.
pub const INSTITUTIONAL_SELF_CITATION: &str = "https://w3id.org/oc/index/InstitutionalSelfCitation";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Iri(String),
    Literal { lexical: String, datatype: String },
}

impl Term {
    fn iri(s: impl Into<String>) -> Term {
        Term::Iri(s.into())
    }

    fn typed(lexical: impl Into<String>, xsd_type: &str) -> Term {
        Term::Literal { lexical: lexical.into(), datatype: format!("{XSD}{xsd_type}") }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write_iri(f, iri),
            Term::Literal { lexical, datatype } => {
                f.write_char('"')?;
                for c in lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        c => f.write_char(c)?,
                    }
                }
                f.write_str("\"^^")?;
                write_iri(f, datatype)
            }
        }
    }
}

/// Writes `<iri>`, escaping characters IRIREF does not allow as `\uXXXX`.
fn write_iri(f: &mut fmt::Formatter<'_>, iri: &str) -> fmt::Result {
    f.write_char('<')?;
    for c in iri.chars() {
        if c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            write!(f, "\\u{:04X}", c as u32)?;
        } else {
            f.write_char(c)?;
        }
    }
    f.write_char('>')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    fn new(subject: &str, predicate: &str, object: Term) -> Triple {
        Triple { subject: subject.to_string(), predicate: predicate.to_string(), object }
    }

    /// Subject, then predicate, then object in its serialized form.
    fn sort_key_cmp(&self, other: &Triple) -> Ordering {
        self.subject
            .cmp(&other.subject)
            .then_with(|| self.predicate.cmp(&other.predicate))
            .then_with(|| self.object.to_string().cmp(&other.object.to_string()))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_iri(f, &self.subject)?;
        f.write_char(' ')?;
        write_iri(f, &self.predicate)?;
        write!(f, " {} .", self.object)
    }
}

pub fn citation_iri(record: &CitationRecord) -> String {
    format!("{CITATION_BASE}{}", record.oci.local_part())
}

fn self_citation_class(kind: SelfCitationType) -> String {
    match kind {
        SelfCitationType::Author => format!("{CITO}AuthorSelfCitation"),
        SelfCitationType::Journal => format!("{CITO}JournalSelfCitation"),
        SelfCitationType::Institutional => INSTITUTIONAL_SELF_CITATION.to_string(),
    }
}

/// Triples describing one citation, in output order.
pub fn citation_to_triples(record: &CitationRecord) -> Vec<Triple> {
    let s = citation_iri(record);
    let cito = |local: &str| format!("{CITO}{local}");
    let mut triples = vec![Triple::new(&s, RDF_TYPE, Term::iri(cito("Citation")))];
    for kind in record.self_citation.iter() {
        triples.push(Triple::new(&s, RDF_TYPE, Term::iri(self_citation_class(kind))));
    }
    triples.push(Triple::new(&s, &cito("hasCitingEntity"), Term::iri(record.citing.iri())));
    triples.push(Triple::new(&s, &cito("hasCitedEntity"), Term::iri(record.cited.iri())));
    if let Some(date) = record.creation {
        triples.push(Triple::new(&s, &cito("hasCitationCreationDate"), Term::typed(date.to_string(), date.xsd_type())));
    }
    if let Some(span) = record.timespan {
        triples.push(Triple::new(&s, &cito("hasCitationTimeSpan"), Term::typed(span.to_string(), "duration")));
    }
    triples.sort_by(Triple::sort_key_cmp);
    triples
}

/// Streams the whole index as sorted N-Triples. Returns the triple count.
///
/// Citation subjects sort in OCI order, so emitting records in OCI order with
/// each record's triples sorted yields a globally sorted file.
pub fn serialize_ntriples<W: Write>(index: &CitationIndex, sink: W) -> io::Result<u64> {
    let mut out = io::BufWriter::new(sink);
    let mut line = String::new();
    let mut n = 0;
    for row in index.rows_by_oci() {
        for triple in citation_to_triples(&row.to_record()) {
            line.clear();
            let _ = writeln!(line, "{triple}");
            out.write_all(line.as_bytes())?;
            n += 1;
        }
    }
    out.flush()?;
    Ok(n)
}
