//! Empirical soliton measurements on simulated histories.
//!
//! Troughs of `x` are located per time row (parabolic refinement in
//! `ln x`), linked greedily into segments, and segments separated by a
//! collision are rejoined by amplitude, which solitons keep through
//! collisions. Velocities are least-squares slopes over "clean" frames
//! only: frames that show every soliton, each at least a collision
//! distance from its neighbours.

use serde::Serialize;

use crate::boxball::BbscState;
use crate::error::MeasureError;
use crate::lattice::FloatField;
use crate::rational::Rat;

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    /// A trough must dip below `1 - threshold`.
    pub threshold: f64,
    /// Frames where two troughs are closer than this are collision frames.
    pub collision_distance: f64,
    /// Amplitudes are read only from frames where the trough is at least
    /// this far from every other trough.
    pub isolation_distance: f64,
    /// Largest position change linking two consecutive samples.
    pub max_jump: f64,
    /// Frames a segment may go unseen before it is closed.
    pub max_gap: i64,
    /// Relative amplitude tolerance for joining segments across a collision.
    pub amplitude_match: f64,
    /// Tracks with fewer samples are dropped.
    pub min_samples: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            threshold: 1e-3,
            collision_distance: 3.0,
            isolation_distance: 5.0,
            max_jump: 2.0,
            max_gap: 2,
            amplitude_match: 0.15,
            min_samples: 3,
        }
    }
}

impl TrackerConfig {
    /// Default config with the linking window widened to
    /// `max(2, ceil(2 v_max))`.
    pub fn for_max_speed(v_max: f64) -> Self {
        TrackerConfig { max_jump: (2.0 * v_max.abs()).ceil().max(2.0), ..Default::default() }
    }
}

/// A local minimum of one row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trough {
    pub position: f64,
    /// `1 - x` at the lattice minimum.
    pub depth: f64,
}

/// Troughs of a single row, left to right.
pub fn find_troughs(row: &[f64], n_lo: i64, threshold: f64) -> Vec<Trough> {
    let mut out = Vec::new();
    for k in 1..row.len().saturating_sub(1) {
        let (l, c, r) = (row[k - 1], row[k], row[k + 1]);
        if !(c < l && c <= r && c < 1.0 - threshold) {
            continue;
        }
        let mut offset = 0.0;
        if l > 0.0 && c > 0.0 && r > 0.0 {
            let (a, b, d) = (l.ln(), c.ln(), r.ln());
            let curvature = a - 2.0 * b + d;
            if curvature > 0.0 {
                offset = (0.5 * (a - d) / curvature).clamp(-0.5, 0.5);
            }
        }
        out.push(Trough { position: (n_lo + k as i64) as f64 + offset, depth: 1.0 - c });
    }
    out
}

/// Trajectory of one trough.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TroughTrack {
    pub times: Vec<i64>,
    pub positions: Vec<f64>,
    /// Sampled `|x - 1|` at each trough.
    #[serde(skip)]
    pub depths: Vec<f64>,
    /// Clean-run index of each sample, `None` inside collisions.
    #[serde(skip)]
    pub runs: Vec<Option<usize>>,
    /// Largest `|x - 1|` over isolated samples.
    pub depth: f64,
}

impl TroughTrack {
    /// Track from bare samples, all treated as one clean run.
    pub fn new(times: Vec<i64>, positions: Vec<f64>) -> Self {
        let k = times.len();
        TroughTrack { times, positions, depths: vec![0.0; k], runs: vec![Some(0); k], depth: 0.0 }
    }

    pub fn first_t(&self) -> i64 {
        self.times.first().copied().unwrap_or_default()
    }

    pub fn last_t(&self) -> i64 {
        self.times.last().copied().unwrap_or_default()
    }

    fn position_at(&self, t: i64) -> Option<f64> {
        self.times.binary_search(&t).ok().map(|k| self.positions[k])
    }
}

#[derive(Clone, Debug)]
struct Segment {
    samples: Vec<(i64, f64, f64)>,
}

impl Segment {
    fn last(&self) -> (i64, f64, f64) {
        *self.samples.last().expect("segments are never empty")
    }
}

struct Frame {
    t: i64,
    troughs: Vec<Trough>,
}

/// Finds and links troughs across all rows of `field`.
pub fn track_troughs(field: &FloatField, cfg: &TrackerConfig) -> Result<Vec<TroughTrack>, MeasureError> {
    if field.rows.is_empty() || field.rows.iter().all(Vec::is_empty) {
        return Err(MeasureError::EmptyField);
    }
    let frames: Vec<Frame> = field
        .rows
        .iter()
        .enumerate()
        .map(|(k, row)| Frame {
            t: field.t0 + k as i64,
            troughs: find_troughs(row, field.n_lo, cfg.threshold),
        })
        .collect();

    let segments = link_segments(&frames, cfg);
    let full = frames.iter().map(|f| f.troughs.len()).max().unwrap_or(0);
    let run_of = clean_runs(&frames, full, cfg.collision_distance);
    let isolated = |t: i64, pos: f64| -> bool {
        let frame = &frames[(t - field.t0) as usize];
        run_of[(t - field.t0) as usize].is_some()
            && frame
                .troughs
                .iter()
                .all(|o| o.position == pos || (o.position - pos).abs() >= cfg.isolation_distance)
    };
    let amplitude = |seg: &Segment| -> f64 {
        let pick = |f: &dyn Fn(&(i64, f64, f64)) -> bool| {
            seg.samples.iter().filter(|s| f(s)).map(|s| s.2).fold(f64::NAN, f64::max)
        };
        let a = pick(&|s| isolated(s.0, s.1));
        if !a.is_nan() {
            return a;
        }
        let a = pick(&|s| run_of[(s.0 - field.t0) as usize].is_some());
        if !a.is_nan() {
            return a;
        }
        pick(&|_| true)
    };

    // Collisions may exchange identities between troughs, so only clean
    // stretches are kept and the stretches are rejoined by amplitude.
    let mut pieces: Vec<Segment> = Vec::new();
    for seg in segments {
        let mut current: Option<(usize, Segment)> = None;
        for s in seg.samples {
            let Some(run) = run_of[(s.0 - field.t0) as usize] else { continue };
            match &mut current {
                Some((r, piece)) if *r == run => piece.samples.push(s),
                _ => {
                    if let Some((_, piece)) = current.take() {
                        pieces.push(piece);
                    }
                    current = Some((run, Segment { samples: vec![s] }));
                }
            }
        }
        pieces.extend(current.map(|(_, piece)| piece));
    }
    pieces.sort_by(|a, b| a.samples[0].0.cmp(&b.samples[0].0).then(a.samples[0].1.total_cmp(&b.samples[0].1)));

    let joined = join_segments(pieces, &amplitude, cfg.amplitude_match);

    Ok(joined
        .into_iter()
        .filter(|seg| seg.samples.len() >= cfg.min_samples)
        .map(|seg| {
            let depth = amplitude(&seg);
            let mut track = TroughTrack {
                times: Vec::with_capacity(seg.samples.len()),
                positions: Vec::with_capacity(seg.samples.len()),
                depths: Vec::with_capacity(seg.samples.len()),
                runs: Vec::with_capacity(seg.samples.len()),
                depth,
            };
            for (t, pos, d) in seg.samples {
                track.times.push(t);
                track.positions.push(pos);
                track.depths.push(d);
                track.runs.push(run_of[(t - field.t0) as usize]);
            }
            track
        })
        .collect())
}

fn link_segments(frames: &[Frame], cfg: &TrackerConfig) -> Vec<Segment> {
    let mut closed: Vec<Segment> = Vec::new();
    let mut open: Vec<Segment> = Vec::new();
    for frame in frames {
        let (still_open, expired): (Vec<_>, Vec<_>) =
            open.drain(..).partition(|s| frame.t - s.last().0 <= cfg.max_gap + 1);
        closed.extend(expired);
        open = still_open;

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (si, seg) in open.iter().enumerate() {
            for (ti, tr) in frame.troughs.iter().enumerate() {
                let d = (tr.position - seg.last().1).abs();
                if d <= cfg.max_jump {
                    pairs.push((d, si, ti));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut seg_used = vec![false; open.len()];
        let mut tr_used = vec![false; frame.troughs.len()];
        for (_, si, ti) in pairs {
            if seg_used[si] || tr_used[ti] {
                continue;
            }
            seg_used[si] = true;
            tr_used[ti] = true;
            let tr = frame.troughs[ti];
            open[si].samples.push((frame.t, tr.position, tr.depth));
        }
        for (ti, tr) in frame.troughs.iter().enumerate() {
            if !tr_used[ti] {
                open.push(Segment { samples: vec![(frame.t, tr.position, tr.depth)] });
            }
        }
    }
    closed.extend(open);
    closed.sort_by_key(|s| s.samples[0].0);
    closed
}

/// Assigns each frame a clean-run index: consecutive frames that show the
/// full trough count with all neighbours at least `min_gap` apart.
fn clean_runs(frames: &[Frame], full: usize, min_gap: f64) -> Vec<Option<usize>> {
    let mut runs = 0;
    let mut previous_clean = false;
    frames
        .iter()
        .map(|f| {
            let clean = f.troughs.len() == full
                && f.troughs.windows(2).all(|w| w[1].position - w[0].position >= min_gap);
            if clean && !previous_clean {
                runs += 1;
            }
            previous_clean = clean;
            clean.then(|| runs - 1)
        })
        .collect()
}

fn join_segments(
    segments: Vec<Segment>,
    amplitude: &dyn Fn(&Segment) -> f64,
    tolerance: f64,
) -> Vec<Segment> {
    let mut tracks: Vec<(Segment, f64)> = Vec::new();
    for seg in segments {
        let a = amplitude(&seg);
        let start = seg.samples[0].0;
        let best = tracks
            .iter()
            .enumerate()
            .filter(|(_, (t, ta))| {
                t.last().0 < start && (a - ta).abs() <= tolerance * a.max(*ta)
            })
            .min_by(|x, y| (a - x.1 .1).abs().total_cmp(&(a - y.1 .1).abs()))
            .map(|(k, _)| k);
        match best {
            Some(k) => {
                let (t, ta) = &mut tracks[k];
                t.samples.extend(seg.samples);
                *ta = ta.max(a);
            }
            None => tracks.push((seg, a)),
        }
    }
    tracks.into_iter().map(|(s, _)| s).collect()
}

/// Least-squares slope of position against time over clean samples, with
/// a separate intercept for each clean run so that collision phase shifts
/// do not bias the slope.
pub fn measure_velocity(track: &TroughTrack) -> Result<f64, MeasureError> {
    let mut groups: std::collections::BTreeMap<usize, Vec<(f64, f64)>> = Default::default();
    for ((&t, &x), run) in track.times.iter().zip(&track.positions).zip(&track.runs) {
        if let Some(r) = run {
            groups.entry(*r).or_default().push((t as f64, x));
        }
    }
    let used: usize = groups.values().map(Vec::len).sum();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for g in groups.values() {
        let k = g.len() as f64;
        let mt = g.iter().map(|p| p.0).sum::<f64>() / k;
        let mx = g.iter().map(|p| p.1).sum::<f64>() / k;
        for &(t, x) in g {
            sxy += (t - mt) * (x - mx);
            sxx += (t - mt) * (t - mt);
        }
    }
    if used < 2 || sxx == 0.0 {
        return Err(MeasureError::TooFewSamples(used));
    }
    Ok(sxy / sxx)
}

/// `max_n |x_n - 1|` of one row.
pub fn measure_amplitude(row: &[f64]) -> Result<f64, MeasureError> {
    if row.is_empty() {
        return Err(MeasureError::EmptyField);
    }
    Ok(row.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
}

/// A ball cluster followed through a box-ball history.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterTrack {
    pub times: Vec<i64>,
    pub leftmost: Vec<i64>,
    /// Ball count, constant along the track.
    pub amplitude: u64,
    profiles: Vec<Vec<u32>>,
}

impl ClusterTrack {
    /// Exact speed: displacement of the leftmost box between the first
    /// sample and the last sample showing the same cluster profile, over
    /// the elapsed time. Falls back to the whole track when the profile
    /// never recurs; `None` for single-sample tracks.
    pub fn speed(&self) -> Option<Rat> {
        if self.times.len() < 2 {
            return None;
        }
        let last = (1..self.times.len())
            .rev()
            .find(|&k| self.profiles[k] == self.profiles[0])
            .unwrap_or(self.times.len() - 1);
        let dt = self.times[last] - self.times[0];
        let dx = self.leftmost[last] - self.leftmost[0];
        Rat::new(dx, dt).ok()
    }
}

#[derive(Clone, Debug)]
struct Cluster {
    left: i64,
    right: i64,
    balls: u64,
    profile: Vec<u32>,
}

fn clusters(state: &BbscState) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < state.u.len() {
        if state.u[k] == 0 {
            k += 1;
            continue;
        }
        let start = k;
        while k < state.u.len() && state.u[k] != 0 {
            k += 1;
        }
        let profile = state.u[start..k].to_vec();
        out.push(Cluster {
            left: start as i64,
            right: k as i64 - 1,
            balls: profile.iter().map(|&v| v as u64).sum(),
            profile,
        });
    }
    out
}

/// Follows ball clusters (maximal runs of occupied boxes) through a
/// history. A cluster continues a track when it has the same ball count
/// and its leftmost box lies within `[left, right + balls]` of the
/// previous cluster; anything else ends the track.
pub fn detect_bbsc_solitons(history: &[BbscState]) -> Result<Vec<ClusterTrack>, MeasureError> {
    let Some(first) = history.first() else {
        return Ok(Vec::new());
    };
    if history
        .iter()
        .any(|s| s.c_box != first.c_box || s.c_carrier != first.c_carrier)
    {
        return Err(MeasureError::InconsistentCapacities);
    }
    let mut done: Vec<ClusterTrack> = Vec::new();
    let mut open: Vec<(ClusterTrack, Cluster)> = Vec::new();
    for (t, state) in history.iter().enumerate() {
        let t = t as i64;
        let current = clusters(state);
        let mut taken = vec![false; current.len()];
        let mut next_open = Vec::new();
        for (mut track, prev) in open.drain(..) {
            let candidate = current
                .iter()
                .enumerate()
                .filter(|(k, c)| {
                    !taken[*k]
                        && c.balls == prev.balls
                        && c.left >= prev.left
                        && c.left <= prev.right + prev.balls as i64
                })
                .min_by_key(|(_, c)| c.left - prev.left)
                .map(|(k, _)| k);
            match candidate {
                Some(k) => {
                    taken[k] = true;
                    let c = current[k].clone();
                    track.times.push(t);
                    track.leftmost.push(c.left);
                    track.profiles.push(c.profile.clone());
                    next_open.push((track, c));
                }
                None => done.push(track),
            }
        }
        for (k, c) in current.into_iter().enumerate() {
            if !taken[k] {
                let track = ClusterTrack {
                    times: vec![t],
                    leftmost: vec![c.left],
                    amplitude: c.balls,
                    profiles: vec![c.profile.clone()],
                };
                next_open.push((track, c));
            }
        }
        open = next_open;
    }
    done.extend(open.into_iter().map(|(t, _)| t));
    done.sort_by_key(|t| (t.times[0], t.leftmost[0]));
    Ok(done)
}

/// Common view of trough and cluster tracks for overtaking analysis.
pub trait Trajectory {
    fn samples(&self) -> Vec<(i64, f64)>;
    fn amplitude(&self) -> f64;
    fn speed(&self) -> Option<f64>;
}

impl Trajectory for TroughTrack {
    fn samples(&self) -> Vec<(i64, f64)> {
        self.times.iter().copied().zip(self.positions.iter().copied()).collect()
    }

    fn amplitude(&self) -> f64 {
        self.depth
    }

    fn speed(&self) -> Option<f64> {
        measure_velocity(self).ok()
    }
}

impl Trajectory for ClusterTrack {
    fn samples(&self) -> Vec<(i64, f64)> {
        self.times.iter().copied().zip(self.leftmost.iter().map(|&l| l as f64)).collect()
    }

    fn amplitude(&self) -> f64 {
        self.amplitude as f64
    }

    fn speed(&self) -> Option<f64> {
        ClusterTrack::speed(self).map(|r| r.to_f64())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackSummary {
    pub amplitude: f64,
    pub speed: Option<f64>,
    pub first_t: i64,
    pub last_t: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Anomaly {
    SmallerFaster,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OvertakeReport {
    pub tracks: Vec<TrackSummary>,
    pub crossing: bool,
    pub anomaly: Anomaly,
    /// Index of the leading track (larger position) at the first and last
    /// common time.
    #[serde(skip)]
    pub initial_leader: usize,
    #[serde(skip)]
    pub final_leader: usize,
}

impl OvertakeReport {
    pub fn smaller_overtakes_larger(&self) -> bool {
        self.anomaly == Anomaly::SmallerFaster
    }
}

/// Compares the ordering of two tracks at their first and last common
/// times.
pub fn overtake_report<T: Trajectory>(tracks: &[T]) -> Result<OvertakeReport, MeasureError> {
    let [a, b] = tracks else {
        return Err(MeasureError::WrongTrackCount(tracks.len()));
    };
    let sa = a.samples();
    let sb: std::collections::BTreeMap<i64, f64> = b.samples().into_iter().collect();
    let common: Vec<(f64, f64)> =
        sa.iter().filter_map(|&(t, x)| sb.get(&t).map(|&y| (x, y))).collect();
    let (Some(&(a0, b0)), Some(&(a1, b1))) = (common.first(), common.last()) else {
        return Err(MeasureError::TooFewSamples(0));
    };
    let leader = |x: f64, y: f64| usize::from(y > x);
    let (initial_leader, final_leader) = (leader(a0, b0), leader(a1, b1));
    let crossing = initial_leader != final_leader && a0 != b0 && a1 != b1;
    let amps = [a.amplitude(), b.amplitude()];
    let smaller = if amps[0] < amps[1] { Some(0) } else if amps[1] < amps[0] { Some(1) } else { None };
    let anomaly = match smaller {
        Some(s) if crossing && final_leader == s => Anomaly::SmallerFaster,
        _ => Anomaly::None,
    };
    let summary = |t: &T| {
        let s = t.samples();
        TrackSummary {
            amplitude: t.amplitude(),
            speed: t.speed(),
            first_t: s.first().map_or(0, |p| p.0),
            last_t: s.last().map_or(0, |p| p.0),
        }
    };
    Ok(OvertakeReport {
        tracks: vec![summary(a), summary(b)],
        crossing,
        anomaly,
        initial_leader,
        final_leader,
    })
}

/// Position of `track` at `t` when sampled there.
pub fn position_at(track: &TroughTrack, t: i64) -> Option<f64> {
    track.position_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxball::{simulate, Carrier};

    #[test]
    fn troughs_of_flat_row() {
        assert!(find_troughs(&[1.0; 10], 0, 1e-3).is_empty());
        let field = FloatField { n_lo: 0, t0: 0, rows: vec![vec![1.0; 8]; 5] };
        assert!(track_troughs(&field, &TrackerConfig::default()).unwrap().is_empty());
        let empty = FloatField { n_lo: 0, t0: 0, rows: vec![] };
        assert_eq!(track_troughs(&empty, &TrackerConfig::default()), Err(MeasureError::EmptyField));
    }

    #[test]
    fn parabolic_refinement_is_exact_for_log_quadratic() {
        // ln x is quadratic in n, so the refined position is exact.
        let row: Vec<f64> = (0..10).map(|n| (0.03 * (n as f64 - 4.2).powi(2) - 0.1).exp()).collect();
        let t = find_troughs(&row, -2, 1e-3);
        assert_eq!(t.len(), 1);
        assert!((t[0].position - 2.2).abs() < 1e-12);
    }

    #[test]
    fn synthetic_velocity() {
        let track = TroughTrack::new((0..10).collect(), (0..10).map(|t| t as f64).collect());
        assert!((measure_velocity(&track).unwrap() - 1.0).abs() < 1e-15);
        let short = TroughTrack::new(vec![3], vec![1.0]);
        assert_eq!(measure_velocity(&short), Err(MeasureError::TooFewSamples(1)));
    }

    #[test]
    fn per_run_intercepts_ignore_jumps() {
        let mut track = TroughTrack::new(
            (0..8).collect(),
            vec![0.0, 0.5, 1.0, 99.0, 99.0, 4.0, 4.5, 5.0],
        );
        track.runs = vec![Some(0), Some(0), Some(0), None, None, Some(1), Some(1), Some(1)];
        assert!((measure_velocity(&track).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn amplitude_of_rows() {
        assert_eq!(measure_amplitude(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(measure_amplitude(&[1.0, 0.6, 1.2]).unwrap(), 0.4);
        assert_eq!(measure_amplitude(&[]), Err(MeasureError::EmptyField));
    }

    #[test]
    fn cluster_speeds() {
        assert!(detect_bbsc_solitons(&[]).unwrap().is_empty());
        let s = BbscState::from_digits("300010", 3, Carrier::Finite(1)).unwrap();
        let tracks = detect_bbsc_solitons(&simulate(&s, 9).unwrap()).unwrap();
        let speeds: Vec<(u64, Rat)> = tracks.iter().map(|t| (t.amplitude, t.speed().unwrap())).collect();
        assert_eq!(speeds, vec![(3, Rat::new(1, 3).unwrap()), (1, Rat::one())]);

        let s = BbscState::from_digits("11", 1, Carrier::Infinite).unwrap();
        let tracks = detect_bbsc_solitons(&simulate(&s, 4).unwrap()).unwrap();
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].speed(), Some(Rat::from_integer(2)));
    }

    #[test]
    fn cluster_speed_uses_profile_period() {
        // 10 steps is not a multiple of the 3-step period of the big cluster.
        let s = BbscState::from_digits("3", 3, Carrier::Finite(1)).unwrap();
        let tracks = detect_bbsc_solitons(&simulate(&s, 10).unwrap()).unwrap();
        assert_eq!(tracks[0].speed(), Some(Rat::new(1, 3).unwrap()));
    }

    #[test]
    fn mixed_capacities_rejected() {
        let a = BbscState::from_digits("1", 3, Carrier::Finite(1)).unwrap();
        let b = BbscState::from_digits("1", 2, Carrier::Finite(1)).unwrap();
        assert_eq!(detect_bbsc_solitons(&[a, b]), Err(MeasureError::InconsistentCapacities));
    }

    #[test]
    fn overtake_on_synthetic_tracks() {
        let mut slow_big = TroughTrack::new((0..20).collect(), (0..20).map(|t| 5.0 + 0.5 * t as f64).collect());
        slow_big.depth = 0.7;
        let mut fast_small = TroughTrack::new((0..20).collect(), (0..20).map(|t| t as f64).collect());
        fast_small.depth = 0.3;
        let rep = overtake_report(&[slow_big.clone(), fast_small.clone()]).unwrap();
        assert!(rep.crossing);
        assert!(rep.smaller_overtakes_larger());

        let parallel = TroughTrack::new((0..20).collect(), (0..20).map(|t| 10.0 + 0.5 * t as f64).collect());
        let rep = overtake_report(&[slow_big.clone(), parallel]).unwrap();
        assert!(!rep.crossing);
        assert_eq!(rep.anomaly, Anomaly::None);

        assert_eq!(overtake_report(&[slow_big]), Err(MeasureError::WrongTrackCount(1)));
        let json = serde_json::to_value(&rep).unwrap();
        assert_eq!(json["anomaly"], "none");
        assert_eq!(json["tracks"].as_array().unwrap().len(), 2);
    }
}
