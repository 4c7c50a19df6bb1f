//! GAP TSV reading and writing.

use std::io::{Read, Write};

use crate::corefhead::{GapInstance, Label};
use crate::error::{Error, Result};

const COLUMNS: [&str; 10] = [
    "ID",
    "Text",
    "Pronoun",
    "Pronoun-offset",
    "A",
    "A-offset",
    "A-coref",
    "B",
    "B-offset",
    "B-coref",
];

fn parse_bool(id: &str, col: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_uppercase().as_str() {
        "TRUE" => Ok(true),
        "FALSE" => Ok(false),
        other => Err(Error::Label {
            id: id.to_string(),
            msg: format!("{col} must be TRUE or FALSE, got {other:?}"),
        }),
    }
}

/// Reads GAP rows. Columns are located by header name; extra columns such
/// as URL are ignored. Fields are not quoted.
pub fn read_gap_tsv<R: Read>(r: R) -> Result<Vec<GapInstance>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 10];
    for (k, name) in COLUMNS.iter().enumerate() {
        idx[k] = headers
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| Error::Format(format!("GAP TSV lacks column {name:?}")))?;
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |k: usize| rec.get(idx[k]).unwrap_or("");
        let offset = |k: usize| -> Result<usize> {
            field(k).trim().parse().map_err(|_| Error::Parse {
                line,
                msg: format!("{} is not a non-negative integer: {:?}", COLUMNS[k], field(k)),
            })
        };
        let id = field(0).to_string();
        let a = parse_bool(&id, "A-coref", field(6))?;
        let b = parse_bool(&id, "B-coref", field(9))?;
        let label = match (a, b) {
            (true, true) => {
                return Err(Error::Label {
                    id,
                    msg: "A-coref and B-coref are both TRUE".into(),
                })
            }
            (true, false) => Label::A,
            (false, true) => Label::B,
            (false, false) => Label::Neither,
        };
        out.push(GapInstance {
            doc_id: id,
            text: field(1).to_string(),
            pronoun: field(2).to_string(),
            pronoun_offset: offset(3)?,
            a_text: field(4).to_string(),
            a_offset: offset(5)?,
            b_text: field(7).to_string(),
            b_offset: offset(8)?,
            label,
        });
    }
    Ok(out)
}

pub fn write_gap_tsv<W: Write>(mut w: W, instances: &[GapInstance]) -> Result<()> {
    writeln!(w, "{}", COLUMNS.join("\t"))?;
    let tf = |b: bool| if b { "TRUE" } else { "FALSE" };
    for i in instances {
        for s in [&i.doc_id, &i.text, &i.pronoun, &i.a_text, &i.b_text] {
            if s.contains(['\t', '\n']) {
                return Err(Error::Format(format!("row {}: field contains a tab or newline", i.doc_id)));
            }
        }
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            i.doc_id,
            i.text,
            i.pronoun,
            i.pronoun_offset,
            i.a_text,
            i.a_offset,
            tf(i.label == Label::A),
            i.b_text,
            i.b_offset,
            tf(i.label == Label::B)
        )?;
    }
    Ok(())
}
