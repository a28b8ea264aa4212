//! Line-delimited JSON protocol for models served by another process.
//!
//! Training: the client sends one
//! `{"op": "train", "manifest": [...], "target": [...]}` line, then one
//! `{"id", "features"}` line per training row in target order, then a blank
//! line. The server answers `{"status": "ok", "rows": n}` (or an error
//! record) followed by a blank line.
//!
//! Prediction: the client sends `{"id", "features"}` lines and a blank line;
//! the server answers one `{"id", "value"}` line per request, in any order,
//! and a blank line. Unreadable lines are answered with
//! `{"error", "line"}` records and the stream carries on.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sentiment::protocol::ErrorRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainHeader {
    pub op: String,
    pub manifest: Vec<String>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRow {
    pub id: String,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueResponse {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainStatus {
    pub status: String,
    pub rows: usize,
}

fn to_line<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Serialization(e.to_string()))
}

fn write_lines<W: Write>(w: &mut W, lines: &[String]) -> Result<()> {
    let io = |e| Error::io("writing to model server", e);
    for l in lines {
        w.write_all(l.as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

/// Reads lines up to a blank line or end of input.
fn read_batch<R: BufRead>(r: &mut R, line: &mut usize) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    loop {
        let mut buf = String::new();
        let n = r.read_line(&mut buf).map_err(|e| Error::io("reading from model server", e))?;
        if n == 0 {
            return Ok(out);
        }
        *line += 1;
        let text = buf.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            return Ok(out);
        }
        out.push((*line, text.to_string()));
    }
}

fn protocol_error(line: usize, text: &str, e: serde_json::Error) -> Error {
    Error::Protocol {
        line,
        message: match serde_json::from_str::<ErrorRecord>(text) {
            Ok(rec) => format!("server rejected request line {}: {}", rec.line, rec.error),
            Err(_) => e.to_string(),
        },
    }
}

/// Client for one trained model served by a child process.
pub struct ExternalModel {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    line: usize,
    width: usize,
}

impl ExternalModel {
    /// Starts the server and trains it on `rows` and `target`.
    pub fn start(command: &[String], rows: &[Vec<f64>], target: &[f64]) -> Result<Self> {
        let manifest: Vec<String> = (0..rows.first().map_or(0, Vec::len)).map(|j| format!("x{j}")).collect();
        Self::start_named(command, &manifest, rows, target)
    }

    pub fn start_named(command: &[String], manifest: &[String], rows: &[Vec<f64>], target: &[f64]) -> Result<Self> {
        if rows.len() != target.len() {
            return Err(Error::Argument(format!("{} rows but {} targets", rows.len(), target.len())));
        }
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Argument("empty model command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::io(format!("starting model server `{program}`"), e))?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().expect("stdout was piped"));
        let mut m = ExternalModel {
            child,
            stdin,
            stdout,
            line: 0,
            width: manifest.len(),
        };
        m.train(manifest, rows, target)?;
        Ok(m)
    }

    fn train(&mut self, manifest: &[String], rows: &[Vec<f64>], target: &[f64]) -> Result<()> {
        let mut lines = vec![to_line(&TrainHeader {
            op: "train".into(),
            manifest: manifest.to_vec(),
            target: target.to_vec(),
        })?];
        for (i, r) in rows.iter().enumerate() {
            lines.push(to_line(&FeatureRow {
                id: format!("t{i}"),
                features: r.clone(),
            })?);
        }
        let stdin = self.stdin.as_mut().expect("open until drop");
        write_lines(stdin, &lines)?;
        let reply = read_batch(&mut self.stdout, &mut self.line)?;
        let [(line, text)] = reply.as_slice() else {
            return Err(Error::Protocol {
                line: self.line,
                message: format!("expected one status line after training, got {}", reply.len()),
            });
        };
        let status: TrainStatus = serde_json::from_str(text).map_err(|e| protocol_error(*line, text, e))?;
        if status.status != "ok" || status.rows != rows.len() {
            return Err(Error::Protocol {
                line: *line,
                message: format!("server reported `{}` after {} of {} rows", status.status, status.rows, rows.len()),
            });
        }
        Ok(())
    }

    pub fn predict(&mut self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(rows.len());
        for (c, chunk) in rows.chunks(256).enumerate() {
            let ids: Vec<String> = (0..chunk.len()).map(|i| format!("p{}", c * 256 + i)).collect();
            let lines = chunk
                .iter()
                .zip(&ids)
                .map(|(r, id)| {
                    if r.len() != self.width {
                        return Err(Error::Schema(format!("row has {} features, model expects {}", r.len(), self.width)));
                    }
                    to_line(&FeatureRow {
                        id: id.clone(),
                        features: r.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let stdin = self.stdin.as_mut().expect("open until drop");
            write_lines(stdin, &lines)?;
            let wanted: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
            let mut got: BTreeMap<String, f64> = BTreeMap::new();
            for (line, text) in read_batch(&mut self.stdout, &mut self.line)? {
                let resp: ValueResponse = serde_json::from_str(&text).map_err(|e| protocol_error(line, &text, e))?;
                if !wanted.contains(resp.id.as_str()) {
                    return Err(Error::Protocol {
                        line,
                        message: format!("response for unknown id `{}`", resp.id),
                    });
                }
                if !resp.value.is_finite() {
                    return Err(Error::Protocol {
                        line,
                        message: format!("non-finite value for id `{}`", resp.id),
                    });
                }
                if got.insert(resp.id.clone(), resp.value).is_some() {
                    return Err(Error::Protocol {
                        line,
                        message: format!("duplicate response for id `{}`", resp.id),
                    });
                }
            }
            for id in &ids {
                out.push(*got.get(id).ok_or_else(|| Error::Correlation(id.clone()))?);
            }
        }
        Ok(out)
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        self.stdin.take();
        let _ = self.child.wait();
    }
}

/// A model as seen by [`serve_model`]: trained from the manifest, rows and
/// target, then asked for one value per feature vector.
pub type Predictor = Box<dyn Fn(&[f64]) -> f64>;

/// Server half of the protocol. `train` builds a predictor from each training
/// batch; prediction batches before any training are answered with error
/// records.
pub fn serve_model<R: BufRead, W: Write>(
    mut reader: R,
    mut writer: W,
    mut train: impl FnMut(&[String], &[Vec<f64>], &[f64]) -> std::result::Result<Predictor, String>,
) -> Result<()> {
    let mut model: Option<(usize, Predictor)> = None;
    let mut line = 0usize;
    loop {
        let before = line;
        let batch = read_batch(&mut reader, &mut line)?;
        if batch.is_empty() {
            if line == before {
                return Ok(());
            }
            write_lines(&mut writer, &[])?;
            continue;
        }
        let mut reply = Vec::new();
        let (first_line, first) = &batch[0];
        if let Ok(header) = serde_json::from_str::<TrainHeader>(first) {
            let mut rows = Vec::new();
            let mut bad = None;
            for (l, text) in &batch[1..] {
                match serde_json::from_str::<FeatureRow>(text) {
                    Ok(r) if r.features.len() == header.manifest.len() => rows.push(r.features),
                    Ok(r) => {
                        bad = Some((*l, format!("{} features for {} columns", r.features.len(), header.manifest.len())));
                        break;
                    }
                    Err(e) => {
                        bad = Some((*l, e.to_string()));
                        break;
                    }
                }
            }
            if bad.is_none() && (header.op != "train" || rows.len() != header.target.len()) {
                bad = Some((
                    *first_line,
                    format!("op `{}` with {} rows for {} targets", header.op, rows.len(), header.target.len()),
                ));
            }
            match bad {
                Some((l, error)) => reply.push(to_line(&ErrorRecord { error, line: l })?),
                None => match train(&header.manifest, &rows, &header.target) {
                    Ok(p) => {
                        model = Some((header.manifest.len(), p));
                        reply.push(to_line(&TrainStatus {
                            status: "ok".into(),
                            rows: rows.len(),
                        })?);
                    }
                    Err(error) => reply.push(to_line(&ErrorRecord {
                        error,
                        line: *first_line,
                    })?),
                },
            }
        } else {
            for (l, text) in &batch {
                let rec = match (serde_json::from_str::<FeatureRow>(text), &model) {
                    (Ok(r), Some((width, p))) if r.features.len() == *width => to_line(&ValueResponse {
                        id: r.id,
                        value: p(&r.features),
                    })?,
                    (Ok(r), Some((width, _))) => to_line(&ErrorRecord {
                        error: format!("{} features, model expects {width}", r.features.len()),
                        line: *l,
                    })?,
                    (Ok(_), None) => to_line(&ErrorRecord {
                        error: "no model trained".into(),
                        line: *l,
                    })?,
                    (Err(e), _) => to_line(&ErrorRecord {
                        error: e.to_string(),
                        line: *l,
                    })?,
                };
                reply.push(rec);
            }
        }
        write_lines(&mut writer, &reply)?;
    }
}

/// Mean target of the `k` training rows nearest in Euclidean distance, ties
/// going to the earlier row.
pub fn knn_predictor(rows: Vec<Vec<f64>>, target: Vec<f64>, k: usize) -> Predictor {
    Box::new(move |x: &[f64]| {
        let mut d: Vec<(f64, usize)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = k.min(d.len()).max(1);
        d[..k].iter().map(|(_, i)| target[*i]).sum::<f64>() / k as f64
    })
}
