//! Bundled synthetic networks and demand data.

use crate::network::{parse_demand_csv, Conductor, DemandStep, Network};
use crate::opf::{ConstraintToggles, ObjectiveSpec, OpfProblem};

const STATCOM_TOY: &str = include_str!("../data/statcom_toy.json");
const DEMO_FEEDER: &str = include_str!("../data/demo_feeder.json");
const SOP_TWO_FEEDER: &str = include_str!("../data/sop_two_feeder.json");
const DEMAND_48: &str = include_str!("../data/demand_48.csv");

fn parse(text: &str) -> Network {
    Network::from_json(text).expect("bundled network parses")
}

/// Two buses: a stiff source and a single-phase-loaded bus carrying a
/// four-leg STATCOM with 30 A phase legs.
pub fn statcom_toy() -> Network {
    parse(STATCOM_TOY)
}

/// Five-bus radial feeder with mixed grounding, a three-wire machine branch
/// and a STATCOM.
pub fn demo_feeder() -> Network {
    parse(DEMO_FEEDER)
}

/// Two feeders joined by a back-to-back converter. Feeder 1 has an
/// unbalanced source and three induction machines.
pub fn sop_two_feeder() -> Network {
    parse(SOP_TWO_FEEDER)
}

/// 48 half-hourly steps for [`statcom_toy`] with an evening peak on phase c.
pub fn demand_48() -> Vec<DemandStep> {
    parse_demand_csv(DEMAND_48.as_bytes()).expect("bundled demand parses")
}

pub fn network(name: &str) -> Option<Network> {
    match name {
        "statcom_toy" => Some(statcom_toy()),
        "demo_feeder" => Some(demo_feeder()),
        "sop_two_feeder" => Some(sop_two_feeder()),
        _ => None,
    }
}

/// Names accepted by [`case`].
pub const CASES: [&str; 5] = ["case1a", "case1b", "case1c", "case1d", "case2"];

/// Four-leg STATCOM limits on [`statcom_toy`]: neutral-leg rating and
/// ripple limit, `None` meaning unconstrained.
fn statcom_case(neutral: Option<f64>, ripple: Option<f64>) -> OpfProblem {
    let mut net = statcom_toy();
    let vsc = &mut net.vscs[0];
    for leg in &mut vsc.legs {
        leg.i_max = if leg.conductor == Conductor::N {
            neutral
        } else {
            Some(30.0)
        };
    }
    vsc.dc_link.ripple_limit = ripple;
    OpfProblem {
        network: net,
        objective: ObjectiveSpec::min_max_current("feeder"),
        toggles: ConstraintToggles::default(),
    }
}

/// Named study configurations.
///
/// * `case1a`: 30 A phase legs, neutral and ripple unconstrained.
/// * `case1b`: neutral leg forced to zero (three-wire converter).
/// * `case1c`: ripple forced to zero.
/// * `case1d`: 30 A neutral leg and a 5 kW ripple limit.
/// * `case2`: derating-plus-ripple objective on [`sop_two_feeder`].
pub fn case(name: &str) -> Option<OpfProblem> {
    Some(match name {
        "case1a" => statcom_case(None, None),
        "case1b" => statcom_case(Some(0.0), None),
        "case1c" => statcom_case(None, Some(0.0)),
        "case1d" => statcom_case(Some(30.0), Some(5000.0)),
        "case2" => OpfProblem {
            network: sop_two_feeder(),
            objective: ObjectiveSpec::derating_plus_ripple(1.0, 1e-4),
            toggles: ConstraintToggles {
                vneg_limit: false,
                ..ConstraintToggles::default()
            },
        },
        _ => return None,
    })
}
