use std::io::{self, Write};

use super::{CitationIndex, CitationRecord, SelfCitationType, SelfCitations, TimeSpan};
use crate::date::PartialDate;
use crate::identifiers::{Doi, Oci};
use crate::LICENSE;

pub const CSV_HEADER: [&str; 8] =
    ["oci", "citing", "cited", "creation", "timespan", "author_sc", "journal_sc", "institutional_sc"];

fn yes_no(set: SelfCitations, kind: SelfCitationType) -> &'static str {
    if set.contains(kind) {
        "yes"
    } else {
        "no"
    }
}

struct CsvSink<W: Write> {
    out: csv::Writer<W>,
    creation: String,
    timespan: String,
}

impl<W: Write> CsvSink<W> {
    fn new(mut inner: W) -> io::Result<Self> {
        writeln!(inner, "# license: {LICENSE}")?;
        let mut out = csv::Writer::from_writer(inner);
        out.write_record(CSV_HEADER)?;
        Ok(CsvSink { out, creation: String::new(), timespan: String::new() })
    }

    fn row(
        &mut self,
        oci: &Oci,
        citing: &Doi,
        cited: &Doi,
        creation: Option<PartialDate>,
        timespan: Option<TimeSpan>,
        sc: SelfCitations,
    ) -> io::Result<()> {
        use std::fmt::Write as _;
        self.creation.clear();
        self.timespan.clear();
        if let Some(d) = creation {
            let _ = write!(self.creation, "{d}");
        }
        if let Some(t) = timespan {
            let _ = write!(self.timespan, "{t}");
        }
        let oci = oci.to_string();
        self.out.write_record([
            oci.as_str(),
            citing.as_str(),
            cited.as_str(),
            &self.creation,
            &self.timespan,
            yes_no(sc, SelfCitationType::Author),
            yes_no(sc, SelfCitationType::Journal),
            yes_no(sc, SelfCitationType::Institutional),
        ])?;
        Ok(())
    }

    fn finish(self) -> io::Result<()> {
        let mut inner = self.out.into_inner().map_err(|e| e.into_error())?;
        inner.flush()
    }
}

/// Writes the whole index as CSV, rows sorted by OCI. Returns the row count.
///
/// The first line is a `# license:` comment, followed by the header row.
pub fn write_csv<W: Write>(index: &CitationIndex, sink: W) -> io::Result<u64> {
    let mut csv = CsvSink::new(sink)?;
    let mut n = 0;
    for row in index.rows_by_oci() {
        csv.row(&row.oci(), row.citing, row.cited, row.creation, row.timespan, row.self_citation)?;
        n += 1;
    }
    csv.finish()?;
    Ok(n)
}

/// Writes the given records in the same CSV layout, in the order given.
pub fn write_csv_records<W: Write>(records: &[CitationRecord], sink: W) -> io::Result<u64> {
    let mut csv = CsvSink::new(sink)?;
    for r in records {
        csv.row(&r.oci, &r.citing, &r.cited, r.creation, r.timespan, r.self_citation)?;
    }
    csv.finish()?;
    Ok(records.len() as u64)
}
