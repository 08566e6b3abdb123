// SPDX-License-Identifier: Apache-2.0

//! Red/blue segment intersection by an x-ordered sweep.
//!
//! Segments from both sets are sorted by their left end. The sweep keeps
//! one active list per set holding segments whose x-span still covers the
//! sweep position; a newly entered segment is tested only against active
//! segments of the other set whose y-span overlaps its own. Same-set pairs
//! are never compared, so adjacent edges sharing a vertex cost nothing.

use super::{segments_intersect, Segment, EPS};

#[derive(Clone, Copy)]
struct Entry {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
    idx: u32,
}

fn entries(segs: &[Segment]) -> Vec<Entry> {
    segs.iter()
        .enumerate()
        .map(|(i, s)| {
            let e = s.envelope();
            Entry {
                min_x: e.min_x,
                max_x: e.max_x,
                min_y: e.min_y,
                max_y: e.max_y,
                idx: i as u32,
            }
        })
        .collect()
}

/// True iff some segment of `a` intersects some segment of `b`.
pub fn sweep_line_intersects(a: &[Segment], b: &[Segment]) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    // Small inputs: the sort costs more than it saves.
    if a.len() * b.len() <= 64 {
        return brute_force_intersects(a, b);
    }
    let mut ea = entries(a);
    let mut eb = entries(b);
    ea.sort_by(|p, q| p.min_x.total_cmp(&q.min_x));
    eb.sort_by(|p, q| p.min_x.total_cmp(&q.min_x));

    let mut active_a: Vec<Entry> = Vec::new();
    let mut active_b: Vec<Entry> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        let take_a = j >= eb.len() || (i < ea.len() && ea[i].min_x <= eb[j].min_x);
        let (cur, own, other, own_segs, other_segs) = if take_a {
            i += 1;
            (ea[i - 1], &mut active_a, &mut active_b, a, b)
        } else {
            j += 1;
            (eb[j - 1], &mut active_b, &mut active_a, b, a)
        };
        let x = cur.min_x;
        other.retain(|e| e.max_x + EPS >= x);
        for e in other.iter() {
            if e.min_y <= cur.max_y + EPS
                && cur.min_y <= e.max_y + EPS
                && segments_intersect(&own_segs[cur.idx as usize], &other_segs[e.idx as usize])
            {
                return true;
            }
        }
        own.push(cur);
    }
    false
}

/// All-pairs reference implementation.
pub fn brute_force_intersects(a: &[Segment], b: &[Segment]) -> bool {
    a.iter().any(|s| b.iter().any(|t| segments_intersect(s, t)))
}
