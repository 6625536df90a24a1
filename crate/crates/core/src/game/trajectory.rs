//! Post-episode checks of a UAV trajectory against the path, association,
//! SINR and power constraints of the joint path/power/association problem.

use crate::scenario::{Grid, Mission};

/// Per-stage record of one UAV. Index 0 is the origin before the first
/// action: the UAV is not associated and does not transmit there.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub cells: Vec<usize>,
    pub assoc: Vec<Option<usize>>,
    pub power_w: Vec<f64>,
    pub sinr_sum: Vec<f64>,
}

impl Trajectory {
    pub fn starting_at(origin: usize) -> Self {
        Trajectory {
            cells: vec![origin],
            assoc: vec![None],
            power_w: vec![0.0],
            sinr_sum: vec![0.0],
        }
    }

    pub fn push(&mut self, cell: usize, assoc: Option<usize>, power_w: f64, sinr_sum: f64) {
        self.cells.push(cell);
        self.assoc.push(assoc);
        self.power_w.push(power_w);
        self.sinr_sum.push(sinr_sum);
    }

    /// Stages taken (excluding the origin entry).
    pub fn steps(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    /// Visited cells with hovering collapsed.
    pub fn visits(&self) -> Vec<usize> {
        let mut v = self.cells.clone();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// Each cell visited at most once.
    VisitOnce,
    /// Starts at the origin, ends at the destination.
    StartEnd,
    /// Every intermediate cell entered is also left, along grid edges.
    FlowConservation,
    /// Transmit power only at visited cells and only when associated.
    PowerWhenVisiting,
    /// Exactly one serving BS at every visited cell after the origin.
    OneAssociation,
    /// Summed SINR at least the threshold. Soft: penalized, not enforced.
    SinrThreshold,
    /// 0 <= P <= P_max.
    PowerBounds,
    /// Finite values, valid cell and BS indices.
    Feasibility,
}

impl Constraint {
    /// Constraints the action space and dynamics are meant to satisfy by
    /// construction.
    pub fn is_structural(self) -> bool {
        self != Constraint::SinrThreshold
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub stage: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Validity {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl Validity {
    pub fn structurally_valid(&self) -> bool {
        self.violations.iter().all(|v| !v.constraint.is_structural())
    }

    pub fn count(&self, c: Constraint) -> usize {
        self.violations.iter().filter(|v| v.constraint == c).count()
    }
}

pub fn trajectory_valid(
    traj: &Trajectory,
    mission: &Mission,
    grid: &Grid,
    bs_count: usize,
    sinr_threshold: f64,
) -> Validity {
    let mut out = Vec::new();
    fn push(out: &mut Vec<Violation>, constraint: Constraint, stage: Option<usize>, detail: String) {
        out.push(Violation {
            constraint,
            stage,
            detail,
        });
    }
    macro_rules! flag {
        ($c:expr, $t:expr, $d:expr $(,)?) => {
            push(&mut out, $c, $t, $d)
        };
    }

    let n = traj.cells.len();
    if n == 0 || traj.assoc.len() != n || traj.power_w.len() != n || traj.sinr_sum.len() != n {
        flag!(
            Constraint::Feasibility,
            None,
            "record columns differ in length or are empty".into()
        );
        return Validity {
            valid: false,
            violations: out,
        };
    }
    for (t, &c) in traj.cells.iter().enumerate() {
        if c >= grid.len() {
            flag!(Constraint::Feasibility, Some(t), format!("cell {c} outside grid"));
        }
    }
    for (t, a) in traj.assoc.iter().enumerate() {
        if let Some(s) = *a {
            if s >= bs_count {
                flag!(Constraint::Feasibility, Some(t), format!("BS {s} does not exist"));
            }
        }
    }
    for (t, p) in traj.power_w.iter().enumerate() {
        if !p.is_finite() {
            flag!(Constraint::Feasibility, Some(t), format!("power {p} not finite"));
        }
    }
    if out.iter().any(|v| v.constraint == Constraint::Feasibility) {
        return Validity {
            valid: false,
            violations: out,
        };
    }

    let visits = traj.visits();
    let mut seen = std::collections::HashSet::new();
    for &c in &visits {
        if !seen.insert(c) {
            flag!(Constraint::VisitOnce, None, format!("cell {c} revisited"));
        }
    }
    if visits.first() != Some(&mission.origin) {
        flag!(
            Constraint::StartEnd,
            Some(0),
            format!("starts at {} not {}", visits[0], mission.origin)
        );
    }
    if visits.last() != Some(&mission.destination) {
        flag!(
            Constraint::StartEnd,
            Some(n - 1),
            format!("ends at {} not {}", visits[visits.len() - 1], mission.destination),
        );
    }
    for w in visits.windows(2) {
        if grid.manhattan(w[0], w[1]).ok() != Some(1) {
            flag!(
                Constraint::FlowConservation,
                None,
                format!("{} -> {} is not a grid edge", w[0], w[1])
            );
        }
    }

    let max_p = mission.max_power_w * (1.0 + 1e-12);
    for t in 0..n {
        let p = traj.power_w[t];
        let assoc = traj.assoc[t];
        if t == 0 {
            if p > 0.0 {
                flag!(
                    Constraint::PowerWhenVisiting,
                    Some(0),
                    "transmits at the origin before moving".into()
                );
            }
            if assoc.is_some() {
                flag!(
                    Constraint::OneAssociation,
                    Some(0),
                    "associated at the origin before moving".into()
                );
            }
            continue;
        }
        if p > 0.0 && assoc.is_none() {
            flag!(
                Constraint::PowerWhenVisiting,
                Some(t),
                "transmits without a serving BS".into()
            );
        }
        if assoc.is_none() {
            flag!(
                Constraint::OneAssociation,
                Some(t),
                "no serving BS at a visited cell".into()
            );
        }
        if !(0.0..=max_p).contains(&p) {
            flag!(
                Constraint::PowerBounds,
                Some(t),
                format!("power {p} W outside [0, {}]", mission.max_power_w)
            );
        }
        if assoc.is_some() && traj.sinr_sum[t] < sinr_threshold {
            flag!(
                Constraint::SinrThreshold,
                Some(t),
                format!("SINR sum {:.3e} below {:.3e}", traj.sinr_sum[t], sinr_threshold),
            );
        }
    }

    Validity {
        valid: out.is_empty(),
        violations: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mission(origin: usize, destination: usize) -> Mission {
        Mission {
            origin,
            destination,
            altitude_m: 120.0,
            max_power_w: 0.1,
            packet_rate: 0.5,
            packet_size_bits: 2000.0,
        }
    }

    fn straight() -> Trajectory {
        let mut t = Trajectory::starting_at(0);
        t.push(1, Some(0), 0.1, 10.0);
        t.push(2, Some(1), 0.06, 10.0);
        t
    }

    #[test]
    fn straight_path_is_valid() {
        let g = Grid::new(4, 4, 40.0);
        let v = trajectory_valid(&straight(), &mission(0, 2), &g, 2, 0.5);
        assert!(v.valid, "{:?}", v.violations);
        assert!(v.violations.is_empty());
    }

    #[test]
    fn hovering_is_not_a_revisit() {
        let g = Grid::new(4, 4, 40.0);
        let mut t = Trajectory::starting_at(0);
        t.push(0, Some(0), 0.1, 10.0);
        t.push(1, Some(0), 0.1, 10.0);
        assert!(trajectory_valid(&t, &mission(0, 1), &g, 1, 0.5).valid);
    }

    #[test]
    fn revisit_reported() {
        let g = Grid::new(4, 4, 40.0);
        let mut t = Trajectory::starting_at(0);
        t.push(1, Some(0), 0.1, 10.0);
        t.push(0, Some(0), 0.1, 10.0);
        t.push(1, Some(0), 0.1, 10.0);
        t.push(2, Some(0), 0.1, 10.0);
        let v = trajectory_valid(&t, &mission(0, 2), &g, 1, 0.5);
        assert!(!v.valid);
        assert!(v.count(Constraint::VisitOnce) >= 1);
    }

    #[test]
    fn over_power_reported() {
        let g = Grid::new(4, 4, 40.0);
        let mut t = straight();
        t.power_w[2] = 0.2;
        let v = trajectory_valid(&t, &mission(0, 2), &g, 2, 0.5);
        assert_eq!(v.count(Constraint::PowerBounds), 1);
        assert_eq!(v.violations.len(), 1);
    }

    #[test]
    fn jumps_and_wrong_end() {
        let g = Grid::new(4, 4, 40.0);
        let mut t = Trajectory::starting_at(0);
        t.push(5, Some(0), 0.1, 10.0);
        let v = trajectory_valid(&t, &mission(0, 2), &g, 1, 0.5);
        assert_eq!(v.count(Constraint::FlowConservation), 1);
        assert_eq!(v.count(Constraint::StartEnd), 1);
    }

    #[test]
    fn sinr_shortfall_is_soft() {
        let g = Grid::new(4, 4, 40.0);
        let mut t = straight();
        t.sinr_sum[1] = 0.1;
        let v = trajectory_valid(&t, &mission(0, 2), &g, 2, 0.5);
        assert!(!v.valid);
        assert!(v.structurally_valid());
        assert_eq!(v.count(Constraint::SinrThreshold), 1);
    }

    #[test]
    fn unassociated_transmission() {
        let g = Grid::new(4, 4, 40.0);
        let mut t = straight();
        t.assoc[1] = None;
        let v = trajectory_valid(&t, &mission(0, 2), &g, 2, 0.5);
        assert_eq!(v.count(Constraint::PowerWhenVisiting), 1);
        assert_eq!(v.count(Constraint::OneAssociation), 1);
    }
}
