//! JSON-lines point files: a header `{"dim": D, "kind": ...}` then one point
//! per line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tiling::{CellId, HPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Continuous,
    Discrete,
}

#[derive(Serialize, Deserialize)]
struct Header {
    dim: usize,
    kind: PointKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointFile {
    Continuous(usize, Vec<HPoint>),
    Discrete(usize, Vec<CellId>),
}

fn parse_err(line: usize, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {e}"))
}

impl PointFile {
    pub fn dim(&self) -> usize {
        match self {
            PointFile::Continuous(d, _) | PointFile::Discrete(d, _) => *d,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PointFile::Continuous(_, p) => p.len(),
            PointFile::Discrete(_, p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, head) = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let h: Header = serde_json::from_str(head).map_err(|e| parse_err(1, e))?;
        if h.dim < 2 {
            return Err(Error::BadDimension(h.dim));
        }
        match h.kind {
            PointKind::Continuous => {
                let mut pts = Vec::new();
                for (i, l) in lines {
                    let p: HPoint = serde_json::from_str(l).map_err(|e| parse_err(i, e))?;
                    let p = HPoint::new(p.x, p.z)?;
                    if p.dim() != h.dim {
                        return Err(Error::DimensionMismatch {
                            expected: h.dim,
                            got: p.dim(),
                        });
                    }
                    pts.push(p);
                }
                Ok(PointFile::Continuous(h.dim, pts))
            }
            PointKind::Discrete => {
                let mut pts = Vec::new();
                for (i, l) in lines {
                    let c: CellId = serde_json::from_str(l).map_err(|e| parse_err(i, e))?;
                    if c.dim() != h.dim {
                        return Err(Error::DimensionMismatch {
                            expected: h.dim,
                            got: c.dim(),
                        });
                    }
                    pts.push(c);
                }
                Ok(PointFile::Discrete(h.dim, pts))
            }
        }
    }

    pub fn to_text(&self) -> String {
        let (dim, kind) = match self {
            PointFile::Continuous(d, _) => (*d, PointKind::Continuous),
            PointFile::Discrete(d, _) => (*d, PointKind::Discrete),
        };
        let mut out = serde_json::to_string(&Header { dim, kind }).expect("header serializes");
        out.push('\n');
        let lines: Vec<String> = match self {
            PointFile::Continuous(_, p) => p.iter().map(|q| serde_json::to_string(q).expect("point")).collect(),
            PointFile::Discrete(_, p) => p.iter().map(|q| serde_json::to_string(q).expect("cell")).collect(),
        };
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }
}
