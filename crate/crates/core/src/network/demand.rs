use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{Conductor, Network};
use crate::{Error, Result};

/// One CSV record: `timestamp,bus,phase,p_kw,q_kvar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    pub timestamp: String,
    pub bus: String,
    pub phase: Conductor,
    pub p_kw: f64,
    pub q_kvar: f64,
}

/// All rows sharing a timestamp, in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandStep {
    pub timestamp: String,
    pub rows: Vec<DemandRow>,
}

pub fn parse_demand_csv(reader: impl Read) -> Result<Vec<DemandStep>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["timestamp", "bus", "phase", "p_kw", "q_kvar"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Demand(format!(
            "expected header {}",
            expected.join(",")
        )));
    }
    let mut steps: Vec<DemandStep> = Vec::new();
    for row in rdr.deserialize() {
        let row: DemandRow = row?;
        if !row.phase.is_phase() {
            return Err(Error::Demand(format!(
                "row at {} targets the neutral",
                row.timestamp
            )));
        }
        match steps.last_mut() {
            Some(s) if s.timestamp == row.timestamp => s.rows.push(row),
            _ => {
                if steps.iter().any(|s| s.timestamp == row.timestamp) {
                    return Err(Error::Demand(format!(
                        "timestamp {} is not contiguous",
                        row.timestamp
                    )));
                }
                steps.push(DemandStep {
                    timestamp: row.timestamp.clone(),
                    rows: vec![row],
                });
            }
        }
    }
    if steps.is_empty() {
        return Err(Error::Demand("no demand rows".into()));
    }
    Ok(steps)
}

pub fn read_demand_csv(path: impl AsRef<std::path::Path>) -> Result<Vec<DemandStep>> {
    parse_demand_csv(std::fs::File::open(path)?)
}

/// Copy of `net` with each row's power written to the single-phase load at
/// that bus and phase.
pub fn apply_demand_step(net: &Network, step: &DemandStep) -> Result<Network> {
    let mut out = net.clone();
    for row in &step.rows {
        let matches: Vec<usize> = out
            .loads
            .iter()
            .enumerate()
            .filter(|(_, l)| l.bus == row.bus && l.phases == [row.phase])
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [k] => {
                out.loads[*k].p_kw = row.p_kw;
                out.loads[*k].q_kvar = row.q_kvar;
            }
            [] => {
                return Err(Error::Demand(format!(
                    "{}: no single-phase load at {}.{}",
                    step.timestamp, row.bus, row.phase
                )))
            }
            _ => {
                return Err(Error::Demand(format!(
                    "{}: several single-phase loads at {}.{}",
                    step.timestamp, row.bus, row.phase
                )))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    const CSV: &str = "timestamp,bus,phase,p_kw,q_kvar\n\
        t0,load,a,30,0\nt0,load,b,10,1\n\
        t1,load,a,31,0\nt1,load,c,11,0\n";

    #[test]
    fn groups_by_timestamp() {
        let steps = parse_demand_csv(CSV.as_bytes()).unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[1].rows[1].phase, Conductor::C);
        assert_eq!(steps[0].rows[1].q_kvar, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_demand_csv("a,b\n1,2\n".as_bytes()).is_err());
        let split = "timestamp,bus,phase,p_kw,q_kvar\nt0,x,a,1,0\nt1,x,a,1,0\nt0,x,b,1,0\n";
        assert!(matches!(
            parse_demand_csv(split.as_bytes()),
            Err(Error::Demand(_))
        ));
        let neutral = "timestamp,bus,phase,p_kw,q_kvar\nt0,x,n,1,0\n";
        assert!(parse_demand_csv(neutral.as_bytes()).is_err());
    }

    #[test]
    fn applies_to_loads() {
        let net = presets::statcom_toy();
        let steps = parse_demand_csv(CSV.as_bytes()).unwrap();
        let stepped = apply_demand_step(&net, &steps[0]).unwrap();
        let a = stepped
            .loads
            .iter()
            .find(|l| l.phases == [Conductor::A])
            .unwrap();
        assert_eq!(a.p_kw, 30.0);

        let missing = DemandStep {
            timestamp: "t".into(),
            rows: vec![DemandRow {
                timestamp: "t".into(),
                bus: "nope".into(),
                phase: Conductor::A,
                p_kw: 1.0,
                q_kvar: 0.0,
            }],
        };
        assert!(apply_demand_step(&net, &missing).is_err());
    }
}
