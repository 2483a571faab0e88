//! DOI normalization and Open Citation Identifiers.
//!
//! An OCI names a single citation. It is derived from the citing and cited
//! DOIs by mapping every DOI character to a fixed two-digit code, so the
//! identifier can be minted without any central state and decoded back to the
//! DOI pair it was built from.
//!
//! ```text
//! oci:020010036013910-020010036023911
//!     ^^^            ^^^
//!     supplier prefix, then two digits per DOI character
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Supplier prefix placed in front of both halves of every OCI.
pub const SUPPLIER_PREFIX: &str = "020";

const OCI_SCHEME: &str = "oci:";

const RESOLVER_PREFIXES: [&str; 4] = ["https://doi.org/", "http://doi.org/", "doi:", "DOI:"];

/// Characters after 'a'..='z', in code order starting at 36.
const PUNCTUATION: [char; 12] = ['.', '-', '_', '/', '(', ')', ':', ';', '<', '>', '#', '+'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentifierError {
    #[error("invalid DOI: {0:?}")]
    InvalidDoi(String),
    #[error("unsupported DOI character {ch:?} in {doi:?}")]
    UnsupportedDoiCharacter { doi: String, ch: char },
    #[error("malformed OCI {oci:?}: {reason}")]
    MalformedOci { oci: String, reason: &'static str },
    #[error("unknown OCI code {code:?} in {oci:?}")]
    UnknownCode { oci: String, code: String },
}

impl IdentifierError {
    /// Structured error name, as reported by the CLI and the HTTP API.
    pub fn name(&self) -> &'static str {
        match self {
            IdentifierError::InvalidDoi(_) => "InvalidDoi",
            IdentifierError::UnsupportedDoiCharacter { .. } => "UnsupportedDoiCharacter",
            IdentifierError::MalformedOci { .. } => "MalformedOci",
            IdentifierError::UnknownCode { .. } => "UnknownCode",
        }
    }
}

/// Two-digit code for a DOI character, if the codec supports it.
pub fn char_code(c: char) -> Option<u8> {
    match c {
        '0'..='9' => Some(c as u8 - b'0'),
        'a'..='z' => Some(c as u8 - b'a' + 10),
        _ => PUNCTUATION.iter().position(|&p| p == c).map(|i| 36 + i as u8),
    }
}

/// Inverse of [`char_code`].
pub fn code_char(code: u8) -> Option<char> {
    match code {
        0..=9 => Some((b'0' + code) as char),
        10..=35 => Some((b'a' + code - 10) as char),
        36..=47 => Some(PUNCTUATION[(code - 36) as usize]),
        _ => None,
    }
}

/// A normalized DOI: lowercase, `10.` prefix, restricted to the OCI alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Doi(String);

impl Doi {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Validates an already-normalized DOI without stripping or case-folding.
    pub fn new(value: impl Into<String>) -> Result<Doi, IdentifierError> {
        let value = value.into();
        validate_doi(&value)?;
        Ok(Doi(value))
    }

    /// Resolver IRI. `#`, `<` and `>` are percent-encoded so the result is a valid IRI.
    pub fn iri(&self) -> String {
        let mut iri = String::with_capacity(16 + self.0.len());
        iri.push_str("https://doi.org/");
        for c in self.0.chars() {
            match c {
                '#' => iri.push_str("%23"),
                '<' => iri.push_str("%3C"),
                '>' => iri.push_str("%3E"),
                c => iri.push(c),
            }
        }
        iri
    }

    /// Appends the OCI digit encoding of this DOI (without supplier prefix).
    fn encode_into(&self, out: &mut String) {
        for c in self.0.chars() {
            // validated at construction
            let code = char_code(c).expect("Doi holds only codec characters");
            out.push((b'0' + code / 10) as char);
            out.push((b'0' + code % 10) as char);
        }
    }

    /// Orders DOIs the way their OCI parts order as strings.
    pub fn cmp_encoded(&self, other: &Doi) -> Ordering {
        let a = self.0.chars().map(|c| char_code(c).unwrap_or(u8::MAX));
        let b = other.0.chars().map(|c| char_code(c).unwrap_or(u8::MAX));
        a.cmp(b)
    }
}

fn validate_doi(value: &str) -> Result<(), IdentifierError> {
    let invalid = || IdentifierError::InvalidDoi(value.to_string());
    let rest = value.strip_prefix("10.").ok_or_else(invalid)?;
    let (prefix, suffix) = rest.split_once('/').ok_or_else(invalid)?;
    if prefix.is_empty() || suffix.is_empty() {
        return Err(invalid());
    }
    if let Some(ch) = value.chars().find(|&c| char_code(c).is_none()) {
        if ch.is_ascii_uppercase() {
            return Err(invalid());
        }
        return Err(IdentifierError::UnsupportedDoiCharacter { doi: value.to_string(), ch });
    }
    Ok(())
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Doi {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Doi {
    type Error = IdentifierError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Doi::new(value)
    }
}

impl From<Doi> for String {
    fn from(doi: Doi) -> String {
        doi.0
    }
}

impl FromStr for Doi {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_doi(s)
    }
}

/// Strips a resolver or scheme prefix, trims and lowercases, then validates.
pub fn normalize_doi(raw: &str) -> Result<Doi, IdentifierError> {
    let trimmed = raw.trim();
    let stripped = RESOLVER_PREFIXES.iter().find_map(|p| trimmed.strip_prefix(p)).unwrap_or(trimmed);
    let value = stripped.trim().to_lowercase();
    validate_doi(&value)?;
    Ok(Doi(value))
}

/// A persistent citation identifier, `oci:<citing part>-<cited part>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Oci {
    citing_part: String,
    cited_part: String,
}

impl Oci {
    pub fn citing_part(&self) -> &str {
        &self.citing_part
    }

    pub fn cited_part(&self) -> &str {
        &self.cited_part
    }

    /// `<citing part>-<cited part>`, the OCI without its scheme.
    pub fn local_part(&self) -> String {
        format!("{}-{}", self.citing_part, self.cited_part)
    }

    pub fn decode(&self) -> (Doi, Doi) {
        // Parts are only ever built by encoding or by a successful decode.
        (
            decode_part(&self.citing_part, "").expect("valid OCI part"),
            decode_part(&self.cited_part, "").expect("valid OCI part"),
        )
    }
}

impl fmt::Display for Oci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{OCI_SCHEME}{}-{}", self.citing_part, self.cited_part)
    }
}

impl Ord for Oci {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl PartialOrd for Oci {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Oci {
    type Err = IdentifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (citing, cited) = decode_oci(s)?;
        Ok(encode_oci(&citing, &cited))
    }
}

impl TryFrom<String> for Oci {
    type Error = IdentifierError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Oci> for String {
    fn from(oci: Oci) -> String {
        oci.to_string()
    }
}

fn encode_part(doi: &Doi) -> String {
    let mut out = String::with_capacity(SUPPLIER_PREFIX.len() + 2 * doi.0.len());
    out.push_str(SUPPLIER_PREFIX);
    doi.encode_into(&mut out);
    out
}

/// Mints the OCI for a citation from `citing` to `cited`.
pub fn encode_oci(citing: &Doi, cited: &Doi) -> Oci {
    Oci { citing_part: encode_part(citing), cited_part: encode_part(cited) }
}

/// Encodes raw DOI strings, validating them first.
pub fn encode_oci_raw(citing: &str, cited: &str) -> Result<Oci, IdentifierError> {
    Ok(encode_oci(&Doi::new(citing)?, &Doi::new(cited)?))
}

fn decode_part(part: &str, oci: &str) -> Result<Doi, IdentifierError> {
    let malformed = |reason| IdentifierError::MalformedOci { oci: oci.to_string(), reason };
    if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed("part is not a digit string"));
    }
    if part.len().is_multiple_of(2) || part.len() < 5 {
        return Err(malformed("part length must be odd and at least 5"));
    }
    let codes = part.strip_prefix(SUPPLIER_PREFIX).ok_or_else(|| malformed("unknown supplier prefix"))?;
    let mut doi = String::with_capacity(codes.len() / 2);
    for pair in codes.as_bytes().chunks_exact(2) {
        let code = (pair[0] - b'0') * 10 + (pair[1] - b'0');
        let ch = code_char(code).ok_or_else(|| IdentifierError::UnknownCode {
            oci: oci.to_string(),
            code: String::from_utf8_lossy(pair).into_owned(),
        })?;
        doi.push(ch);
    }
    Doi::new(doi).map_err(|_| malformed("decoded part is not a valid DOI"))
}

/// Parses `oci:<digits>-<digits>` back into its (citing, cited) DOI pair.
pub fn decode_oci(oci: &str) -> Result<(Doi, Doi), IdentifierError> {
    let body = oci
        .strip_prefix(OCI_SCHEME)
        .ok_or(IdentifierError::MalformedOci { oci: oci.to_string(), reason: "missing oci: scheme" })?;
    let (citing, cited) = body
        .split_once('-')
        .ok_or(IdentifierError::MalformedOci { oci: oci.to_string(), reason: "missing - separator" })?;
    Ok((decode_part(citing, oci)?, decode_part(cited, oci)?))
}
