//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! feature edge 2
//! p_real 0.8 0.2
//! p_gen  0.2 0.8
//! learned d
//! ```
//!
//! Each block starts with `feature <name> <alphabet>` followed by `p_real`,
//! `p_gen`, and `learned both|d|none`. Blocks must be ordered so that
//! `both` features come first, then `d`, then `none` (the learned sets are
//! prefixes). Scenario files describe class-conditionally independent
//! features; correlated scenarios are built programmatically.

use super::{FeatureSpec, GanScenario, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Learned {
    Both,
    D,
    None,
}

struct Block {
    line: usize,
    name: String,
    alphabet: usize,
    p_real: Option<Vec<f64>>,
    p_gen: Option<Vec<f64>>,
    learned: Option<Learned>,
}

fn parse_row(line_no: usize, rest: &str) -> Result<Vec<f64>> {
    rest.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| SimError::Parse {
                line: line_no,
                msg: format!("bad probability {tok:?}"),
            })
        })
        .collect()
}

fn finish_block(block: Block, features: &mut Vec<FeatureSpec>, flags: &mut Vec<Learned>) -> Result<()> {
    let p_real = block.p_real.ok_or(SimError::Parse {
        line: block.line,
        msg: format!("feature {:?} is missing p_real", block.name),
    })?;
    let p_gen = block.p_gen.ok_or(SimError::Parse {
        line: block.line,
        msg: format!("feature {:?} is missing p_gen", block.name),
    })?;
    if p_real.len() != block.alphabet || p_gen.len() != block.alphabet {
        return Err(SimError::Parse {
            line: block.line,
            msg: format!(
                "feature {:?} declares alphabet {} but rows have {}/{} entries",
                block.name,
                block.alphabet,
                p_real.len(),
                p_gen.len()
            ),
        });
    }
    let learned = block.learned.ok_or(SimError::Parse {
        line: block.line,
        msg: format!("feature {:?} is missing its learned flag", block.name),
    })?;
    features.push(FeatureSpec::new(block.name, p_real, p_gen)?);
    flags.push(learned);
    Ok(())
}

/// Parse a scenario description.
pub fn scenario_from_str(text: &str) -> Result<GanScenario> {
    let mut features: Vec<FeatureSpec> = Vec::new();
    let mut flags: Vec<Learned> = Vec::new();
    let mut current: Option<Block> = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match key {
            "feature" => {
                if let Some(block) = current.take() {
                    finish_block(block, &mut features, &mut flags)?;
                }
                let (name, alpha) = rest.split_once(char::is_whitespace).ok_or(SimError::Parse {
                    line: line_no,
                    msg: "expected `feature <name> <alphabet>`".into(),
                })?;
                let alphabet: usize = alpha.trim().parse().map_err(|_| SimError::Parse {
                    line: line_no,
                    msg: format!("bad alphabet size {alpha:?}"),
                })?;
                current = Some(Block {
                    line: line_no,
                    name: name.to_string(),
                    alphabet,
                    p_real: None,
                    p_gen: None,
                    learned: None,
                });
            }
            "p_real" | "p_gen" | "learned" => {
                let block = current.as_mut().ok_or(SimError::Parse {
                    line: line_no,
                    msg: format!("{key} before any `feature` line"),
                })?;
                match key {
                    "p_real" => block.p_real = Some(parse_row(line_no, rest)?),
                    "p_gen" => block.p_gen = Some(parse_row(line_no, rest)?),
                    _ => {
                        block.learned = Some(match rest {
                            "both" => Learned::Both,
                            "d" => Learned::D,
                            "none" => Learned::None,
                            other => {
                                return Err(SimError::Parse {
                                    line: line_no,
                                    msg: format!(
                                        "learned flag must be both|d|none, got {other:?}"
                                    ),
                                })
                            }
                        })
                    }
                }
            }
            other => {
                return Err(SimError::Parse {
                    line: line_no,
                    msg: format!("unknown directive {other:?}"),
                })
            }
        }
    }
    if let Some(block) = current.take() {
        finish_block(block, &mut features, &mut flags)?;
    }
    if features.is_empty() {
        return Err(SimError::Parse { line: 0, msg: "scenario has no features".into() });
    }
    // Flags must form prefixes: both* d* none*.
    let mut g = 0usize;
    let mut d = 0usize;
    let mut stage = Learned::Both;
    for (i, flag) in flags.iter().enumerate() {
        let ok = match (stage, flag) {
            (Learned::Both, Learned::Both) => true,
            (Learned::Both, Learned::D) | (Learned::D, Learned::D) => {
                stage = Learned::D;
                true
            }
            (_, Learned::None) => {
                stage = Learned::None;
                true
            }
            _ => false,
        };
        if !ok {
            return Err(SimError::Parse {
                line: 0,
                msg: format!(
                    "learned flags must be ordered both, then d, then none; \
                     feature {} breaks the order",
                    features[i].name
                ),
            });
        }
        match flag {
            Learned::Both => {
                g += 1;
                d += 1;
            }
            Learned::D => d += 1,
            Learned::None => {}
        }
    }
    GanScenario::independent(features, d, g)
}

/// Load a scenario file.
pub fn scenario_from_file(path: impl AsRef<std::path::Path>) -> Result<GanScenario> {
    let text = std::fs::read_to_string(path)?;
    scenario_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two matched features then a separating one
feature size 2
p_real 0.5 0.5
p_gen 0.5 0.5
learned both

feature color 3
p_real 0.2 0.3 0.5
p_gen 0.2 0.3 0.5
learned d

feature edge 2
p_real 0.8 0.2
p_gen 0.2 0.8
learned none
";

    #[test]
    fn parses_counts_and_rows() {
        let s = scenario_from_str(SAMPLE).unwrap();
        assert_eq!(s.num_features(), 3);
        assert_eq!(s.learned_by_g(), 1);
        assert_eq!(s.learned_by_d(), 2);
        assert_eq!(s.features()[1].name, "color");
        assert_eq!(s.features()[2].p_gen, vec![0.2, 0.8]);
    }

    #[test]
    fn rejects_bad_orders_and_rows() {
        let reordered = SAMPLE.replace("learned both", "learned none");
        assert!(matches!(scenario_from_str(&reordered), Err(SimError::Parse { .. })));

        let short_row = SAMPLE.replace("p_real 0.2 0.3 0.5", "p_real 0.2 0.8");
        assert!(matches!(scenario_from_str(&short_row), Err(SimError::Parse { .. })));

        let bad_sum = SAMPLE.replace("p_real 0.8 0.2", "p_real 0.8 0.8");
        assert!(matches!(scenario_from_str(&bad_sum), Err(SimError::InvalidPmf { .. })));

        assert!(scenario_from_str("").is_err());
    }
}
