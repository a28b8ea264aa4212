//! Line-delimited JSON classifier protocol.
//!
//! The client writes one `{"id", "text"}` object per line and ends the batch
//! with a blank line. The server answers every request with one
//! `{"id", "label", "scores"?}` line, in any order, and ends its answer with a
//! blank line. Labels are `positive`, `neutral` or `negative`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TextPost;
use crate::sentiment::{Lexicon, Polarity, Scores, SentimentLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Response {
    pub id: String,
    pub label: Polarity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Scores>,
}

/// Sent by a server in place of a response when a request line is unreadable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error: String,
    pub line: usize,
}

/// Anything that labels posts, one label per post in input order.
pub trait Classifier {
    fn classify(&mut self, posts: &[TextPost]) -> Result<Vec<SentimentLabel>>;
}

impl Classifier for Lexicon {
    fn classify(&mut self, posts: &[TextPost]) -> Result<Vec<SentimentLabel>> {
        Ok(posts.iter().map(|p| Lexicon::classify(self, &p.text)).collect())
    }
}

pub fn classify_via_protocol(endpoint: &mut dyn Classifier, posts: &[TextPost]) -> Result<Vec<SentimentLabel>> {
    let labels = endpoint.classify(posts)?;
    if labels.len() != posts.len() {
        return Err(Error::Protocol {
            line: 0,
            message: format!("{} labels for {} posts", labels.len(), posts.len()),
        });
    }
    Ok(labels)
}

pub fn write_batch<W: Write>(writer: &mut W, requests: &[Request]) -> Result<()> {
    let io = |e| Error::io("writing classifier requests", e);
    for r in requests {
        let line = serde_json::to_string(r).map_err(|e| Error::Serialization(e.to_string()))?;
        writer.write_all(line.as_bytes()).map_err(io)?;
        writer.write_all(b"\n").map_err(io)?;
    }
    writer.write_all(b"\n").map_err(io)?;
    writer.flush().map_err(io)
}

/// Reads one batch of responses and joins them to `ids`. `line` counts
/// response lines across calls so errors point at the stream position.
pub fn read_responses<R: BufRead>(reader: &mut R, ids: &[String], line: &mut usize) -> Result<Vec<SentimentLabel>> {
    let wanted: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
    let mut got: BTreeMap<String, SentimentLabel> = BTreeMap::new();
    loop {
        let mut buf = String::new();
        let n = reader
            .read_line(&mut buf)
            .map_err(|e| Error::io("reading classifier responses", e))?;
        if n == 0 {
            break;
        }
        *line += 1;
        let text = buf.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            break;
        }
        let resp: Response = serde_json::from_str(text).map_err(|e| Error::Protocol {
            line: *line,
            message: match serde_json::from_str::<ErrorRecord>(text) {
                Ok(rec) => format!("server rejected request line {}: {}", rec.line, rec.error),
                Err(_) => e.to_string(),
            },
        })?;
        if !wanted.contains(resp.id.as_str()) {
            return Err(Error::Protocol {
                line: *line,
                message: format!("response for unknown id `{}`", resp.id),
            });
        }
        let label = match resp.scores {
            Some(s) => SentimentLabel::with_scores(resp.label, s).map_err(|e| Error::Protocol {
                line: *line,
                message: e.to_string(),
            })?,
            None => SentimentLabel::new(resp.label),
        };
        if got.insert(resp.id.clone(), label).is_some() {
            return Err(Error::Protocol {
                line: *line,
                message: format!("duplicate response for id `{}`", resp.id),
            });
        }
    }
    ids.iter()
        .map(|id| got.get(id).copied().ok_or_else(|| Error::Correlation(id.clone())))
        .collect()
}

fn requests_for(posts: &[TextPost]) -> Result<Vec<Request>> {
    let mut seen = BTreeSet::new();
    posts
        .iter()
        .map(|p| {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::Argument(format!("post id `{}` occurs twice in one batch", p.id)));
            }
            Ok(Request {
                id: p.id.clone(),
                text: p.text.clone(),
            })
        })
        .collect()
}

/// One request/response round trip over an arbitrary byte stream pair.
pub fn exchange<R: BufRead, W: Write>(
    reader: &mut R,
    writer: &mut W,
    posts: &[TextPost],
    line: &mut usize,
) -> Result<Vec<SentimentLabel>> {
    let requests = requests_for(posts)?;
    write_batch(writer, &requests)?;
    let ids: Vec<String> = requests.into_iter().map(|r| r.id).collect();
    read_responses(reader, &ids, line)
}

/// A classifier served by a child process over its standard input and output.
pub struct ProcessClassifier {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    batch_size: usize,
    line: usize,
}

impl ProcessClassifier {
    pub fn spawn(command: &[String], batch_size: usize) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Argument("empty classifier command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::io(format!("starting classifier `{program}`"), e))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout was piped"));
        Ok(ProcessClassifier {
            child,
            stdin,
            stdout,
            batch_size: batch_size.max(1),
            line: 0,
        })
    }
}

impl Classifier for ProcessClassifier {
    fn classify(&mut self, posts: &[TextPost]) -> Result<Vec<SentimentLabel>> {
        let mut out = Vec::with_capacity(posts.len());
        for chunk in posts.chunks(self.batch_size) {
            let stdin = self
                .stdin
                .as_mut()
                .ok_or_else(|| Error::Argument("classifier input already closed".into()))?;
            out.extend(exchange(&mut self.stdout, stdin, chunk, &mut self.line)?);
        }
        Ok(out)
    }
}

impl Drop for ProcessClassifier {
    fn drop(&mut self) {
        // closing stdin lets a well-behaved server exit on its own
        self.stdin.take();
        if !matches!(self.child.try_wait(), Ok(Some(_))) {
            let _ = self.child.wait();
        }
    }
}

/// Server half: answers each batch with `label_of`, replying to unreadable
/// request lines with an [`ErrorRecord`] and carrying on. Returns at end of
/// input.
pub fn serve<R: BufRead, W: Write>(reader: R, writer: W, label_of: impl FnMut(&Request) -> SentimentLabel) -> Result<()> {
    serve_with(reader, writer, label_of, ServeMode::InOrder)
}

/// Deliberate deviations a test server can make from a well-behaved reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServeMode {
    InOrder,
    /// Answer each batch in reverse order.
    Reversed,
    /// Leave out the last answer of each batch.
    DropLast,
}

pub fn serve_with<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    mut label_of: impl FnMut(&Request) -> SentimentLabel,
    mode: ServeMode,
) -> Result<()> {
    let io = |e| Error::io("classifier server", e);
    let mut pending: Vec<String> = Vec::new();
    let mut line_no = 0usize;
    let mut first_line = 1usize;
    let mut lines = reader.lines();
    loop {
        let next = lines.next().transpose().map_err(io)?;
        let end_of_batch = match &next {
            None => true,
            Some(l) => l.trim().is_empty(),
        };
        if let Some(l) = &next {
            line_no += 1;
            if !end_of_batch {
                pending.push(l.clone());
                continue;
            }
        }
        if !pending.is_empty() || next.is_some() {
            let mut replies = Vec::with_capacity(pending.len());
            for (k, raw) in pending.drain(..).enumerate() {
                let reply = match serde_json::from_str::<Request>(&raw) {
                    Ok(req) => {
                        let label = label_of(&req);
                        serde_json::to_string(&Response {
                            id: req.id,
                            label: label.value,
                            scores: label.scores,
                        })
                    }
                    Err(e) => serde_json::to_string(&ErrorRecord {
                        error: e.to_string(),
                        line: first_line + k,
                    }),
                }
                .map_err(|e| Error::Serialization(e.to_string()))?;
                replies.push(reply);
            }
            match mode {
                ServeMode::InOrder => {}
                ServeMode::Reversed => replies.reverse(),
                ServeMode::DropLast => {
                    replies.pop();
                }
            }
            for reply in replies {
                writer.write_all(reply.as_bytes()).map_err(io)?;
                writer.write_all(b"\n").map_err(io)?;
            }
            writer.write_all(b"\n").map_err(io)?;
            writer.flush().map_err(io)?;
        }
        first_line = line_no + 1;
        if next.is_none() {
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Currency, Source};
    use std::io::Cursor;

    fn posts(n: usize) -> Vec<TextPost> {
        (0..n)
            .map(|i| TextPost {
                id: format!("p{i}"),
                timestamp: "2021-08-01T00:00:00Z".parse().unwrap(),
                source: Source::News,
                currency: Currency::Eth,
                text: if i % 2 == 0 { "bullish rally".into() } else { "crash".into() },
                engagement: Default::default(),
            })
            .collect()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn request_lines_and_terminator() {
        let mut out = Vec::new();
        write_batch(
            &mut out,
            &[Request {
                id: "a".into(),
                text: "hi".into(),
            }],
        )
        .unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\"id\":\"a\",\"text\":\"hi\"}\n\n");
    }

    #[test]
    fn shuffled_responses_rejoined_by_id() {
        let text = "{\"id\":\"p2\",\"label\":\"negative\"}\n{\"id\":\"p0\",\"label\":\"positive\"}\n{\"id\":\"p1\",\"label\":\"neutral\"}\n\n";
        let mut line = 0;
        let labels = read_responses(&mut Cursor::new(text), &ids(3), &mut line).unwrap();
        let values: Vec<Polarity> = labels.iter().map(|l| l.value).collect();
        assert_eq!(values, vec![Polarity::Positive, Polarity::Neutral, Polarity::Negative]);
        assert_eq!(line, 4);
    }

    #[test]
    fn missing_id_is_correlation_error() {
        let text = "{\"id\":\"p0\",\"label\":\"positive\"}\n\n";
        match read_responses(&mut Cursor::new(text), &ids(2), &mut 0) {
            Err(Error::Correlation(id)) => assert_eq!(id, "p1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"id\":\"p0\",\"label\":\"positive\"}\n{\"id\":\"p1\",\"label\":\"bullish\"}\n\n";
        match read_responses(&mut Cursor::new(text), &ids(2), &mut 0) {
            Err(Error::Protocol { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scores_captured_and_checked() {
        let ok = "{\"id\":\"p0\",\"label\":\"neutral\",\"scores\":{\"positive\":0.25,\"neutral\":0.5,\"negative\":0.25}}\n\n";
        let l = read_responses(&mut Cursor::new(ok), &ids(1), &mut 0).unwrap();
        assert_eq!(l[0].scores.unwrap().neutral, 0.5);
        let bad = "{\"id\":\"p0\",\"label\":\"neutral\",\"scores\":{\"positive\":0.6,\"neutral\":0.3,\"negative\":0.1}}\n\n";
        assert!(matches!(
            read_responses(&mut Cursor::new(bad), &ids(1), &mut 0),
            Err(Error::Protocol { line: 1, .. })
        ));
    }

    #[test]
    fn server_round_trip_in_memory() {
        let lex = Lexicon::builtin();
        let input = "{\"id\":\"a\",\"text\":\"rally\"}\nnot json\n{\"id\":\"b\",\"text\":\"crash\"}\n\n{\"id\":\"c\",\"text\":\"meh\"}\n";
        let mut out = Vec::new();
        serve(Cursor::new(input), &mut out, |r| lex.classify(&r.text)).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "{\"id\":\"a\",\"label\":\"positive\"}");
        assert!(lines[1].starts_with("{\"error\":") && lines[1].ends_with("\"line\":2}"));
        assert_eq!(lines[2], "{\"id\":\"b\",\"label\":\"negative\"}");
        assert_eq!(lines[3], "");
        assert_eq!(lines[4], "{\"id\":\"c\",\"label\":\"neutral\"}");
        assert_eq!(lines[5], "");
    }

    #[test]
    fn exchange_against_lexicon_server() {
        // server output prepared by running the server on the client's bytes
        let p = posts(3);
        let mut request = Vec::new();
        write_batch(&mut request, &requests_for(&p).unwrap()).unwrap();
        let mut response = Vec::new();
        let lex = Lexicon::builtin();
        serve(Cursor::new(request), &mut response, |r| lex.classify(&r.text)).unwrap();
        let mut sink = Vec::new();
        let labels = exchange(&mut Cursor::new(response), &mut sink, &p, &mut 0).unwrap();
        let values: Vec<Polarity> = labels.iter().map(|l| l.value).collect();
        assert_eq!(values, vec![Polarity::Positive, Polarity::Negative, Polarity::Positive]);
    }
}
