//! Splitting a large branch.
//!
//! Walking along the large branch `e`, the two branches entering behind it
//! are `x_l` (left) and `x_r`, the two leaving ahead are `y_l` and `y_r`.
//! When `w(x_l) > w(y_l)` the track splits to the right: `x_l` feeds `y_l`
//! and a new diagonal of weight `w(x_l) − w(y_l)` that joins `x_r` in front
//! of `y_r`. The left split is the mirror image and a tie splits centrally,
//! leaving two parallel strands.

use super::{hb, BranchEnd, HalfBranch, Region, Switch, TrainTrack};
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Left,
    Right,
    Central,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitRecord {
    pub branch: usize,
    pub kind: SplitKind,
    /// The two competing weights `w(x_l)` and `w(y_l)`.
    pub compared: (BigRational, BigRational),
    /// Weight of the diagonal; zero for a central split.
    pub new_weight: BigRational,
    /// Old index of each new branch; `None` for the diagonal.
    pub old_of_new: Vec<Option<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("branch {0} is not large")]
    NotLarge(usize),
    #[error("branch {0} has both ends at one switch")]
    Loop(usize),
    #[error("branch {0}: only switches with two branches opposite the large branch can be split")]
    Valence(usize),
    #[error("weights do not satisfy the switch conditions")]
    Weights,
}

/// Branches whose two ends are each alone on their side of the switch.
pub fn large_branches(track: &TrainTrack) -> Vec<usize> {
    (0..track.branches())
        .filter(|&b| {
            [BranchEnd::Start, BranchEnd::End].iter().all(|&end| match track.locate(hb(b, end)) {
                Some((s, inc, _)) => {
                    let sw = &track.switches[s];
                    (if inc { &sw.incoming } else { &sw.outgoing }).len() == 1
                }
                None => false,
            })
        })
        .collect()
}

pub fn split(
    track: &TrainTrack,
    weights: &[BigRational],
    e: usize,
) -> Result<(TrainTrack, Vec<BigRational>, SplitRecord), SplitError> {
    if !super::check_switch_conditions(track, weights).map(|r| r.pass()).unwrap_or(false) {
        return Err(SplitError::Weights);
    }
    if !large_branches(track).contains(&e) {
        return Err(SplitError::NotLarge(e));
    }
    let (p, e_in_at_p, _) = track.locate(hb(e, BranchEnd::Start)).expect("large branch has a start");
    let (q, e_in_at_q, _) = track.locate(hb(e, BranchEnd::End)).expect("large branch has an end");
    if p == q {
        return Err(SplitError::Loop(e));
    }
    let (sp, sq) = (&track.switches[p], &track.switches[q]);
    let xs = if e_in_at_p { &sp.outgoing } else { &sp.incoming };
    let ys = if e_in_at_q { &sq.outgoing } else { &sq.incoming };
    if xs.len() != 2 || ys.len() != 2 {
        return Err(SplitError::Valence(e));
    }
    // Walking from `p` to `q`, left is the top of a switch whose frame agrees
    // with the walk and the bottom of one that is turned around.
    let (xl, xr) = if e_in_at_p { (xs[0], xs[1]) } else { (xs[1], xs[0]) };
    let (yl, yr) = if e_in_at_q { (ys[1], ys[0]) } else { (ys[0], ys[1]) };
    let (l_region, r_region) = (sp.cusps.first().copied(), sq.cusps.first().copied());
    let (wl, wr) = (weights[xl.branch].clone(), weights[yl.branch].clone());
    let kind = if wl > wr {
        SplitKind::Right
    } else if wl < wr {
        SplitKind::Left
    } else {
        SplitKind::Central
    };
    let labels = |r: Option<usize>| r.into_iter().collect::<Vec<_>>();
    let (start, end) = (hb(e, BranchEnd::Start), hb(e, BranchEnd::End));
    let mut out = track.clone();
    let mut w = weights.to_vec();
    let diagonal = (&wl - &wr).abs();
    let mut old_of_new: Vec<Option<usize>> = (0..track.branches()).map(Some).collect();
    match kind {
        SplitKind::Right => {
            out.switches[p] = Switch { incoming: vec![xl], outgoing: vec![start, yl], cusps: labels(r_region) };
            out.switches[q] = Switch { incoming: vec![xr, end], outgoing: vec![yr], cusps: labels(l_region) };
            w[e] = diagonal.clone();
            old_of_new[e] = None;
        }
        SplitKind::Left => {
            out.switches[p] = Switch { incoming: vec![xr], outgoing: vec![yr, start], cusps: labels(r_region) };
            out.switches[q] = Switch { incoming: vec![end, xl], outgoing: vec![yl], cusps: labels(l_region) };
            w[e] = diagonal.clone();
            old_of_new[e] = None;
        }
        SplitKind::Central => {
            out.switches[p] = Switch { incoming: vec![xl], outgoing: vec![yl], cusps: Vec::new() };
            out.switches[q] = Switch { incoming: vec![xr], outgoing: vec![yr], cusps: Vec::new() };
            merge_regions(&mut out, l_region, r_region);
            remove_branch(&mut out, &mut w, &mut old_of_new, e);
        }
    }
    let record = SplitRecord { branch: e, kind, compared: (wl, wr), new_weight: diagonal, old_of_new };
    Ok((out, w, record))
}

/// The central split opens a channel between the regions behind and ahead
/// of the branch, removing both cusps.
fn merge_regions(t: &mut TrainTrack, l: Option<usize>, r: Option<usize>) {
    let (Some(l), Some(r)) = (l, r) else {
        // Without cusp labels the census can no longer be tracked.
        t.regions.clear();
        return;
    };
    if l == r {
        let g = &mut t.regions[l];
        g.corners -= 2;
        g.boundaries += 1;
        return;
    }
    let (a, b) = (t.regions[l], t.regions[r]);
    t.regions[l] = Region {
        genus: a.genus + b.genus,
        corners: a.corners + b.corners - 2,
        punctures: a.punctures + b.punctures,
        boundaries: a.boundaries + b.boundaries - 1,
    };
    t.regions.remove(r);
    for s in &mut t.switches {
        for c in &mut s.cusps {
            if *c == r {
                *c = l;
            }
            if *c > r {
                *c -= 1;
            }
        }
    }
}

fn remove_branch(t: &mut TrainTrack, w: &mut Vec<BigRational>, old: &mut Vec<Option<usize>>, e: usize) {
    let last = t.branches() - 1;
    t.names.swap_remove(e);
    w.swap_remove(e);
    old.swap_remove(e);
    if e != last {
        let rename = |h: &mut HalfBranch| {
            if h.branch == last {
                h.branch = e;
            }
        };
        for s in &mut t.switches {
            s.incoming.iter_mut().for_each(rename);
            s.outgoing.iter_mut().for_each(rename);
        }
    }
}
