//! Plain-text plan records.
//!
//! ```text
//! # seqtest-plan v1
//! family gmt
//! model gaussian:0.5
//! alpha 1e-12
//! beta 1e-2
//! mode cumulative
//! param k0 2e0
//! budget type2 63 7.4e-3
//! checkpoint 63 accept -2.1e-1
//! checkpoint 101 final 2.5e-1
//! ```
//!
//! Reals are written in the shortest scientific form that parses back to the
//! same `f64`, so a parsed plan evaluates bit-for-bit like the original.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{Budget, Checkpoint, ErrorKind, Family, PlanMeta, Rule, SprtDesign, StatisticMode, TestPlan};
use crate::error::{Error, Result};
use crate::model::HypothesisModel;

pub const HEADER: &str = "# seqtest-plan v1";
pub const SPRT_HEADER: &str = "# seqtest-sprt v1";

impl fmt::Display for TestPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.meta;
        writeln!(f, "{HEADER}")?;
        writeln!(f, "family {}", m.family)?;
        writeln!(f, "model {}", m.model)?;
        writeln!(f, "alpha {:e}", m.alpha)?;
        writeln!(f, "beta {:e}", m.beta)?;
        let mode = match self.mode {
            StatisticMode::CumulativeAverage => "cumulative",
            StatisticMode::PerStageAverage => "per-stage",
        };
        writeln!(f, "mode {mode}")?;
        for (k, v) in &m.params {
            writeln!(f, "param {k} {v:e}")?;
        }
        for b in &m.budgets {
            let kind = match b.kind {
                ErrorKind::TypeI => "type1",
                ErrorKind::TypeII => "type2",
            };
            writeln!(f, "budget {kind} {} {:e}", b.n, b.level)?;
        }
        for cp in &self.checkpoints {
            let mut line = format!("checkpoint {} ", cp.n);
            match cp.rule {
                Rule::AcceptOnly(c) => write!(line, "accept {c:e}"),
                Rule::RejectOnly(c) => write!(line, "reject {c:e}"),
                Rule::Both { accept, reject } => write!(line, "both {accept:e} {reject:e}"),
                Rule::Final(c) => write!(line, "final {c:e}"),
            }?;
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn real(line: usize, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing number"))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("'{tok}' is not a number")))
}

fn count(line: usize, tok: Option<&str>) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing sample size"))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("'{tok}' is not a sample size")))
}

impl FromStr for TestPlan {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(parse_err(1, format!("expected header '{HEADER}'"))),
        }
        let mut family = None;
        let mut model = None;
        let mut alpha = None;
        let mut beta = None;
        let mut mode = None;
        let mut params = Vec::new();
        let mut budgets = Vec::new();
        let mut checkpoints = Vec::new();
        for (no, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap_or_default();
            match key {
                "family" => {
                    let name = toks.next().unwrap_or_default();
                    family = Some(Family::from_name(name).ok_or_else(|| parse_err(no, format!("unknown family '{name}'")))?);
                }
                "model" => {
                    let spec = toks.next().unwrap_or_default();
                    model = Some(
                        spec.parse::<HypothesisModel>()
                            .map_err(|e| parse_err(no, e.to_string()))?,
                    );
                }
                "alpha" => alpha = Some(real(no, toks.next())?),
                "beta" => beta = Some(real(no, toks.next())?),
                "mode" => {
                    mode = Some(match toks.next() {
                        Some("cumulative") => StatisticMode::CumulativeAverage,
                        Some("per-stage") => StatisticMode::PerStageAverage,
                        other => return Err(parse_err(no, format!("unknown mode {other:?}"))),
                    })
                }
                "param" => {
                    let name = toks.next().ok_or_else(|| parse_err(no, "missing parameter name"))?;
                    params.push((name.to_string(), real(no, toks.next())?));
                }
                "budget" => {
                    let kind = match toks.next() {
                        Some("type1") => ErrorKind::TypeI,
                        Some("type2") => ErrorKind::TypeII,
                        other => return Err(parse_err(no, format!("unknown budget kind {other:?}"))),
                    };
                    let n = count(no, toks.next())?;
                    budgets.push(Budget {
                        n,
                        kind,
                        level: real(no, toks.next())?,
                    });
                }
                "checkpoint" => {
                    let n = count(no, toks.next())?;
                    let rule = match toks.next() {
                        Some("accept") => Rule::AcceptOnly(real(no, toks.next())?),
                        Some("reject") => Rule::RejectOnly(real(no, toks.next())?),
                        Some("both") => Rule::Both {
                            accept: real(no, toks.next())?,
                            reject: real(no, toks.next())?,
                        },
                        Some("final") => Rule::Final(real(no, toks.next())?),
                        other => return Err(parse_err(no, format!("unknown rule {other:?}"))),
                    };
                    checkpoints.push(Checkpoint { n, rule });
                }
                other => return Err(parse_err(no, format!("unknown record '{other}'"))),
            }
            if let Some(extra) = toks.next() {
                return Err(parse_err(no, format!("unexpected trailing token '{extra}'")));
            }
        }
        let missing = |what: &str| parse_err(0, format!("missing '{what}' record"));
        let meta = PlanMeta {
            family: family.ok_or_else(|| missing("family"))?,
            model: model.ok_or_else(|| missing("model"))?,
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            beta: beta.ok_or_else(|| missing("beta"))?,
            params,
            budgets,
        };
        TestPlan::new(checkpoints, mode.ok_or_else(|| missing("mode"))?, meta)
    }
}

impl fmt::Display for SprtDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{SPRT_HEADER}")?;
        writeln!(f, "alpha {:e}", self.alpha)?;
        writeln!(f, "beta {:e}", self.beta)?;
        writeln!(f, "upper {:e}", self.a)?;
        writeln!(f, "lower {:e}", self.b)
    }
}

impl FromStr for SprtDesign {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, SPRT_HEADER)) => {}
            _ => return Err(parse_err(1, format!("expected header '{SPRT_HEADER}'"))),
        }
        let (mut alpha, mut beta, mut a, mut b) = (None, None, None, None);
        for (no, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let slot = match toks.next().unwrap_or_default() {
                "alpha" => &mut alpha,
                "beta" => &mut beta,
                "upper" => &mut a,
                "lower" => &mut b,
                other => return Err(parse_err(no, format!("unknown record '{other}'"))),
            };
            *slot = Some(real(no, toks.next())?);
            if let Some(extra) = toks.next() {
                return Err(parse_err(no, format!("unexpected trailing token '{extra}'")));
            }
        }
        let missing = |what: &str| parse_err(0, format!("missing '{what}' record"));
        let design = SprtDesign {
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            beta: beta.ok_or_else(|| missing("beta"))?,
            a: a.ok_or_else(|| missing("upper"))?,
            b: b.ok_or_else(|| missing("lower"))?,
        };
        if !(design.a > 0.0 && design.b > 0.0) {
            return Err(parse_err(0, "SPRT thresholds must be positive"));
        }
        Ok(design)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plans::{design_gmt, design_sprt, design_st, GammaRule};

    #[test]
    fn round_trip_is_exact() {
        let m = HypothesisModel::gaussian(0.5).unwrap();
        for plan in [
            design_gmt(&m, 1e-12, 1e-2, GammaRule::OptimizeEssBound).unwrap(),
            design_st(&m, 1e-6, 1e-6, 3).unwrap(),
        ] {
            let text = plan.to_string();
            let back: TestPlan = text.parse().unwrap();
            assert_eq!(back, plan);
            assert_eq!(back.to_string(), text);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let m = HypothesisModel::gaussian(0.5).unwrap();
        let text = design_st(&m, 1e-3, 1e-3, 2).unwrap().to_string();
        assert!("family gmt".parse::<TestPlan>().is_err());
        let broken = text.replace("checkpoint", "chekpoint");
        match broken.parse::<TestPlan>() {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("unexpected {other:?}"),
        }
        let broken = text.replace("final", "final 1.0");
        assert!(broken.parse::<TestPlan>().is_err());
    }

    #[test]
    fn sprt_round_trip() {
        let d = design_sprt(1e-12, 1e-2).unwrap();
        let back: SprtDesign = d.to_string().parse().unwrap();
        assert_eq!(back, d);
        assert!(d.to_string().replace("upper", "uper").parse::<SprtDesign>().is_err());
    }
}
