//! Channel-aware ED→UAV matching.
//!
//! EDs are visited in ascending index order. Each one joins the UAV of
//! highest gain among those within communication range that still have
//! quota left; ties go to the lowest UAV index. An ED with no feasible UAV
//! stays unassigned. Total cost is O(V·U).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{dist2, Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationState {
    /// Serving UAV of each ED, if any.
    pub assignment: Vec<Option<usize>>,
    pub num_uavs: usize,
    pub quota: usize,
    pub comm_range_m: f64,
}

impl AssociationState {
    pub fn empty(num_eds: usize, num_uavs: usize, quota: usize, comm_range_m: f64) -> Self {
        Self {
            assignment: vec![None; num_eds],
            num_uavs,
            quota,
            comm_range_m,
        }
    }

    /// Binary `a[u][v]` view.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.assignment.len()]; self.num_uavs];
        for (v, a) in self.assignment.iter().enumerate() {
            if let Some(u) = a {
                m[*u][v] = 1;
            }
        }
        m
    }

    /// EDs served by `uav`, ascending.
    pub fn served_by(&self, uav: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(v, a)| (*a == Some(uav)).then_some(v))
            .collect()
    }

    pub fn load(&self, uav: usize) -> usize {
        self.assignment.iter().filter(|a| **a == Some(uav)).count()
    }

    pub fn num_assigned(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }
}

/// Runs the sequential constrained argmax. `gains[v][u]` is the channel gain
/// between ED `v` and UAV `u`.
pub fn channel_aware_match(
    ed_positions: &[Vec2],
    uav_positions: &[Vec2],
    gains: &[Vec<f64>],
    quota: usize,
    comm_range_m: f64,
) -> AssociationState {
    let num_uavs = uav_positions.len();
    let mut state = AssociationState::empty(ed_positions.len(), num_uavs, quota, comm_range_m);
    let mut load = vec![0usize; num_uavs];
    for (v, ed) in ed_positions.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (u, uav) in uav_positions.iter().enumerate() {
            if load[u] >= quota || dist2(*ed, *uav) > comm_range_m {
                continue;
            }
            let g = gains[v][u];
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((u, g));
            }
        }
        if let Some((u, _)) = best {
            load[u] += 1;
            state.assignment[v] = Some(u);
        }
    }
    state
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub ed: usize,
    pub uav: Option<usize>,
    pub distance_m: Option<f64>,
    pub gain: Option<f64>,
}

pub fn snapshot(
    assoc: &AssociationState,
    ed_positions: &[Vec2],
    uav_positions: &[Vec2],
    gains: &[Vec<f64>],
) -> Vec<SnapshotRow> {
    assoc
        .assignment
        .iter()
        .enumerate()
        .map(|(v, a)| SnapshotRow {
            ed: v,
            uav: *a,
            distance_m: a.map(|u| dist2(ed_positions[v], uav_positions[u])),
            gain: a.map(|u| gains[v][u]),
        })
        .collect()
}

/// Writes `ed,uav,distance_m,gain`; unassigned EDs have `none` in the UAV
/// column and empty distance/gain.
pub fn write_snapshot_csv(path: &Path, rows: &[SnapshotRow]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "ed,uav,distance_m,gain")?;
    for r in rows {
        match (r.uav, r.distance_m, r.gain) {
            (Some(u), Some(d), Some(g)) => writeln!(f, "{},{},{},{}", r.ed, u, d, g)?,
            _ => writeln!(f, "{},none,,", r.ed)?,
        }
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_uav_in_range() {
        let a = channel_aware_match(&[[0.0, 0.0]], &[[10.0, 0.0]], &[vec![0.5]], 1, 100.0);
        assert_eq!(a.assignment, vec![Some(0)]);
    }

    #[test]
    fn full_nearer_uav_pushes_to_farther() {
        // ED 0 and ED 1 both prefer UAV 0; quota 1 sends ED 1 to UAV 1.
        let eds = [[0.0, 0.0], [1.0, 0.0]];
        let uavs = [[2.0, 0.0], [50.0, 0.0]];
        let gains = vec![vec![0.9, 0.1], vec![0.95, 0.2]];
        let a = channel_aware_match(&eds, &uavs, &gains, 1, 100.0);
        assert_eq!(a.assignment, vec![Some(0), Some(1)]);
        assert_eq!(a.matrix(), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn out_of_range_stays_unassigned() {
        let a = channel_aware_match(
            &[[0.0, 0.0]],
            &[[900.0, 0.0], [0.0, 950.0]],
            &[vec![1.0, 1.0]],
            4,
            800.0,
        );
        assert_eq!(a.assignment, vec![None]);
        assert_eq!(a.num_assigned(), 0);
    }

    #[test]
    fn ties_go_to_lowest_uav() {
        let a = channel_aware_match(
            &[[0.0, 0.0]],
            &[[1.0, 0.0], [-1.0, 0.0]],
            &[vec![0.3, 0.3]],
            2,
            10.0,
        );
        assert_eq!(a.assignment, vec![Some(0)]);
    }

    #[test]
    fn served_by_is_ascending() {
        let eds = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let gains = vec![vec![1.0]; 3];
        let a = channel_aware_match(&eds, &[[0.0, 0.0]], &gains, 3, 10.0);
        assert_eq!(a.served_by(0), vec![0, 1, 2]);
        assert_eq!(a.load(0), 3);
    }

    #[test]
    fn snapshot_csv_marks_unassigned() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("assoc.csv");
        let eds = [[0.0, 0.0], [500.0, 0.0]];
        let uavs = [[0.0, 0.0]];
        let gains = vec![vec![1e-7], vec![1e-9]];
        let a = channel_aware_match(&eds, &uavs, &gains, 5, 100.0);
        write_snapshot_csv(&p, &snapshot(&a, &eds, &uavs, &gains)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "ed,uav,distance_m,gain\n0,0,0,0.0000001\n1,none,,\n");
    }
}
