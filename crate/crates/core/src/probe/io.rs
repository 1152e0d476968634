//! Line-delimited probe files: one header record, then one record per ternary.
//!
//! ```text
//! {"format_version":1,"property":"P-A","split":"test","trainable":true,"seed":42,"max_per_node":null,"source_digest":"…"}
//! {"taxonomy_id":"t1","n":{"id":"x1",…},"l":{…},"r":{…},"dist_nl":1,"dist_nr":2}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ProbeDataset, ProbeError, Provenance, Split, Ternary};
use crate::property::HierarchyProperty;
use crate::taxonomy::ConceptNode;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    property: HierarchyProperty,
    split: Split,
    trainable: bool,
    seed: u64,
    max_per_node: Option<usize>,
    source_digest: String,
}

#[derive(Serialize, Deserialize)]
struct Record {
    taxonomy_id: String,
    n: ConceptNode,
    l: ConceptNode,
    r: ConceptNode,
    dist_nl: usize,
    dist_nr: usize,
}

fn to_line<T: Serialize>(value: &T) -> std::io::Result<String> {
    serde_json::to_string(value).map_err(std::io::Error::other)
}

pub fn write_probes<W: Write>(dataset: &ProbeDataset, mut sink: W) -> Result<(), ProbeError> {
    let header = Header {
        format_version: FORMAT_VERSION,
        property: dataset.property,
        split: dataset.split,
        trainable: dataset.trainable(),
        seed: dataset.provenance.seed,
        max_per_node: dataset.provenance.max_per_node,
        source_digest: dataset.provenance.source_digest.clone(),
    };
    writeln!(sink, "{}", to_line(&header)?)?;
    for t in &dataset.ternaries {
        let record = Record {
            taxonomy_id: t.taxonomy_id.clone(),
            n: t.n.clone(),
            l: t.l.clone(),
            r: t.r.clone(),
            dist_nl: t.dist_nl,
            dist_nr: t.dist_nr,
        };
        writeln!(sink, "{}", to_line(&record)?)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_probes<R: BufRead>(source: R) -> Result<ProbeDataset, ProbeError> {
    let mut lines = source.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });

    let (line_no, line) = lines.next().ok_or(ProbeError::MissingHeader)?;
    let header: Header = serde_json::from_str(&line?).map_err(|e| ProbeError::MalformedRecord {
        line: line_no,
        message: e.to_string(),
    })?;
    if header.format_version != FORMAT_VERSION {
        return Err(ProbeError::UnsupportedVersion(header.format_version));
    }
    if header.trainable != header.property.trainable() {
        return Err(ProbeError::PropertyMismatch {
            line: line_no,
            message: format!(
                "header marks {} as trainable={}",
                header.property, header.trainable
            ),
        });
    }

    let mut ternaries = Vec::new();
    let mut line_of = Vec::new();
    for (line_no, line) in lines {
        let record: Record =
            serde_json::from_str(&line?).map_err(|e| ProbeError::MalformedRecord {
                line: line_no,
                message: e.to_string(),
            })?;
        let t = Ternary {
            property: header.property,
            taxonomy_id: record.taxonomy_id,
            n: record.n,
            l: record.l,
            r: record.r,
            dist_nl: record.dist_nl,
            dist_nr: record.dist_nr,
        };
        t.check().map_err(|message| ProbeError::PropertyMismatch {
            line: line_no,
            message,
        })?;
        ternaries.push(t);
        line_of.push(line_no);
    }

    let provenance = Provenance {
        seed: header.seed,
        max_per_node: header.max_per_node,
        source_digest: header.source_digest,
    };
    // Re-map dataset positions to file line numbers.
    ProbeDataset::new(header.property, header.split, ternaries, provenance).map_err(|e| match e {
        ProbeError::DuplicateTernary { line, key } => ProbeError::DuplicateTernary {
            line: line_of[line - 1],
            key,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{build_splits, GenConfig};
    use crate::taxonomy::{Taxonomy, TaxonomyRecord};

    fn sibling_far() -> ProbeDataset {
        let nodes = ["R", "A", "B", "a1", "a2", "x1", "x2"]
            .iter()
            .map(|n| ConceptNode::new(*n, n.to_lowercase(), format!("gloss of {n}")))
            .collect();
        let edges = [
            ("A", "R"),
            ("B", "R"),
            ("a1", "A"),
            ("a2", "A"),
            ("x1", "a1"),
            ("x2", "a1"),
        ]
        .iter()
        .map(|(c, p)| (c.to_string(), p.to_string()))
        .collect();
        let tax = Taxonomy::try_from(TaxonomyRecord {
            taxonomy_id: "t".into(),
            nodes,
            edges,
            root: None,
        })
        .unwrap();
        let config = GenConfig::new(5, None, [1.0, 0.0, 0.0]).unwrap();
        build_splits(&[tax], HierarchyProperty::SiblingFar, &config)
            .unwrap()
            .train
    }

    fn encode(d: &ProbeDataset) -> String {
        let mut buf = Vec::new();
        write_probes(d, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn round_trip() {
        let d = sibling_far();
        assert_eq!(d.len(), 4);
        let back = read_probes(encode(&d).as_bytes()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn inverted_distances_are_rejected() {
        let text = concat!(
            r#"{"format_version":1,"property":"P-A","split":"test","trainable":true,"seed":1,"max_per_node":null,"source_digest":""}"#,
            "\n",
            r#"{"taxonomy_id":"t","n":{"id":"n","name":"n"},"l":{"id":"l","name":"l"},"r":{"id":"r","name":"r"},"dist_nl":2,"dist_nr":1}"#,
            "\n"
        );
        assert!(matches!(
            read_probes(text.as_bytes()),
            Err(ProbeError::PropertyMismatch { line: 2, .. })
        ));
    }

    #[test]
    fn truncated_line_reports_its_number() {
        let full = encode(&sibling_far());
        let mut lines: Vec<&str> = full.lines().collect();
        let cut = &lines[3][..lines[3].len() / 2];
        lines[3] = cut;
        let text = lines.join("\n");
        assert!(matches!(
            read_probes(text.as_bytes()),
            Err(ProbeError::MalformedRecord { line: 4, .. })
        ));
    }

    #[test]
    fn header_problems() {
        assert!(matches!(
            read_probes(&b""[..]),
            Err(ProbeError::MissingHeader)
        ));
        let as_trainable = r#"{"format_version":1,"property":"A-S","split":"dev","trainable":true,"seed":1,"max_per_node":null,"source_digest":""}"#;
        assert!(matches!(
            read_probes(as_trainable.as_bytes()),
            Err(ProbeError::PropertyMismatch { line: 1, .. })
        ));
        let future = r#"{"format_version":9,"property":"P-A","split":"dev","trainable":true,"seed":1,"max_per_node":null,"source_digest":""}"#;
        assert!(matches!(
            read_probes(future.as_bytes()),
            Err(ProbeError::UnsupportedVersion(9))
        ));
    }

    #[test]
    fn duplicate_record_line_number() {
        let full = encode(&sibling_far());
        let mut lines: Vec<&str> = full.lines().collect();
        lines.push(lines[1]);
        let text = lines.join("\n");
        assert!(matches!(
            read_probes(text.as_bytes()),
            Err(ProbeError::DuplicateTernary { line: 6, .. })
        ));
    }
}
