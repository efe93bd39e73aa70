use std::io::{BufRead, Write};

use serde::Serialize;

use super::{SampleBatch, SampleError, SourceTag, TransitionSample};
use crate::template::MdpTemplate;

/// A line that did not become a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    /// 1-based line number in the input stream.
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngestOutcome {
    pub batch: SampleBatch,
    pub rejections: Vec<Rejection>,
}

/// Read JSONL sample records and validate each against the template.
///
/// Blank lines are skipped. Any other line that fails to decode or to fit
/// the template is reported in `rejections`; with `strict` the first such
/// line aborts the read instead.
pub fn ingest_samples<R: BufRead>(
    mut reader: R,
    tpl: &MdpTemplate,
    source: SourceTag,
    strict: bool,
) -> Result<IngestOutcome, SampleError> {
    let mut batch = SampleBatch::empty(tpl, source);
    let mut rejections = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        match parse_line(&buf, tpl) {
            Ok(None) => {}
            Ok(Some(sample)) => batch.samples.push(sample),
            Err(reason) if strict => {
                return Err(SampleError::Rejected { line: line_no, reason })
            }
            Err(reason) => rejections.push(Rejection { line: line_no, reason }),
        }
    }
    Ok(IngestOutcome { batch, rejections })
}

fn parse_line(raw: &[u8], tpl: &MdpTemplate) -> Result<Option<TransitionSample>, String> {
    let text = std::str::from_utf8(raw).map_err(|_| "invalid UTF-8".to_string())?;
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    if let Some(r) = value.get("reward") {
        if r.as_u64().is_none_or(|r| r > 1) {
            return Err(format!("reward must be 0 or 1, got {r}"));
        }
    }
    let sample: TransitionSample =
        serde_json::from_value(value).map_err(|e| format!("malformed record: {e}"))?;
    sample.check(tpl).map_err(|e| e.to_string())?;
    Ok(Some(sample))
}

/// Write samples as JSONL, one record per line.
pub fn write_jsonl<W: Write>(samples: &[TransitionSample], mut out: W) -> std::io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{ActionKind, Origin, TemplateAction, TemplateVariable};

    fn tpl() -> MdpTemplate {
        MdpTemplate {
            focal_object: "bottle".into(),
            variables: vec![TemplateVariable {
                id: "bottle.cap.state".into(),
                domain: vec!["opened".into(), "closed".into()],
                origin: Origin::Own,
            }],
            actions: vec![TemplateAction {
                id: "bottle.cap.open".into(),
                params: vec![],
                kind: ActionKind::Control,
            }],
        }
    }

    const GOOD: &str = r#"{"state":{"bottle.cap.state":"closed"},"action":"bottle.cap.open","params":{},"next_state":{"bottle.cap.state":"opened"},"reward":1}"#;

    fn run(text: &str) -> IngestOutcome {
        ingest_samples(text.as_bytes(), &tpl(), SourceTag::File, false).unwrap()
    }

    #[test]
    fn empty_stream_gives_empty_batch() {
        let out = run("");
        assert!(out.batch.is_empty());
        assert!(out.rejections.is_empty());
    }

    #[test]
    fn out_of_domain_value_is_rejected() {
        let bad = GOOD.replace(r#""closed""#, r#""ajar""#);
        let out = run(&format!("{GOOD}\n{bad}\n"));
        assert_eq!(out.batch.len(), 1);
        assert_eq!(out.rejections.len(), 1);
        assert_eq!(out.rejections[0].line, 2);
        assert!(out.rejections[0].reason.contains("value not in domain"));
    }

    #[test]
    fn reward_outside_binary_is_rejected() {
        let bad = GOOD.replace(r#""reward":1"#, r#""reward":2"#);
        assert_eq!(run(&bad).rejections.len(), 1);
        let bad = GOOD.replace(r#""reward":1"#, r#""reward":0.5"#);
        assert_eq!(run(&bad).rejections.len(), 1);
    }

    #[test]
    fn strict_mode_aborts() {
        let err = ingest_samples("nope\n".as_bytes(), &tpl(), SourceTag::File, true).unwrap_err();
        assert!(matches!(err, SampleError::Rejected { line: 1, .. }));
    }

    #[test]
    fn jsonl_round_trip() {
        let out = run(GOOD);
        let mut buf = Vec::new();
        write_jsonl(&out.batch.samples, &mut buf).unwrap();
        let again = run(std::str::from_utf8(&buf).unwrap());
        assert_eq!(again.batch.samples, out.batch.samples);
    }
}
