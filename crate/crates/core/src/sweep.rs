//! Optimal stretch factors by an event sweep.
//!
//! A lattice point `(a, b)` lies inside `rΓ(s)` for `s` in a closed interval
//! `[s_enter, s_exit]`, possibly empty. The count `N(r, ·)` is therefore a
//! step function whose jumps sit at interval endpoints. Sorting the
//! endpoints and scanning them with a counter recovers the whole step
//! function, hence its extremal value and the exact set where it is
//! attained.
//!
//! For the Lamé family membership reads `(as)^p + (b/s)^p ≤ r^p`. With
//! `u = s^p`, `x = (a/r)^p` and `y = (b/r)^p` this is the quadratic
//! `x·u² − u + y ≤ 0`, so both endpoints have closed forms. The sweep runs
//! in `u` and converts back to `s` only for reported intervals.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::counting::{count_unchecked, Quadrant};
use crate::curves::Curve;
use crate::error::{ensure_positive, Error, Result};

/// Discriminants down to `-DISC_TOL` count as tangencies.
const DISC_TOL: f64 = 1e-12;

/// One lattice point's membership interval in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub j: u64,
    pub k: u64,
    pub s_enter: f64,
    pub s_exit: f64,
}

/// A real interval with independently open or closed ends. `hi` may be
/// `+∞`, in which case it is open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Interval {
        Interval {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Interval {
        Interval {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn point(s: f64) -> Interval {
        Interval::closed(s, s)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, s: f64) -> bool {
        let above = if self.lo_open {
            s > self.lo
        } else {
            s >= self.lo
        };
        let below = if self.hi_open {
            s < self.hi
        } else {
            s <= self.hi
        };
        above && below
    }

    /// Like [`Interval::contains`], with each end widened (closed) or
    /// narrowed (open) by `rel` relative. Endpoints reflected through
    /// `s ↦ 1/s` differ from directly computed roots by a few ulps.
    pub fn contains_within(&self, s: f64, rel: f64) -> bool {
        let lo = self.lo * (1.0 + if self.lo_open { rel } else { -rel });
        let hi = self.hi * (1.0 + if self.hi_open { -rel } else { rel });
        (if self.lo_open { s > lo } else { s >= lo })
            && (if self.hi_open { s < hi } else { s <= hi })
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Interval {
        Interval {
            lo: f(self.lo),
            hi: f(self.hi),
            ..self
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_point() && !self.lo_open {
            return write!(out, "{{{}}}", self.lo);
        }
        write!(
            out,
            "{}{}, {}{}",
            if self.lo_open { '(' } else { '[' },
            self.lo,
            self.hi,
            if self.hi_open { ')' } else { ']' }
        )
    }
}

/// Extremal count over `s > 0` at one radius, and where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchResult {
    pub r: f64,
    pub extremal_count: u64,
    /// Disjoint, increasing. Maximisers form closed intervals; minimisers
    /// of the closed-quadrant count are usually open.
    pub intervals: Vec<Interval>,
    /// Right end of the last interval.
    pub sup_s: Option<f64>,
    /// Set when no lattice point ever enters, so every `s` is extremal and
    /// `intervals` is empty.
    pub every_s: bool,
}

impl StretchResult {
    pub fn inf_s(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.lo)
    }

    pub fn contains(&self, s: f64) -> bool {
        self.every_s || self.intervals.iter().any(|i| i.contains(s))
    }

    pub fn contains_within(&self, s: f64, rel: f64) -> bool {
        self.every_s || self.intervals.iter().any(|i| i.contains_within(s, rel))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Radius from which events are merged lazily instead of materialised.
    pub stream_threshold: f64,
    /// Endpoints within this relative distance are one breakpoint.
    pub tie_tolerance: f64,
    /// Result intervals separated by a smaller relative gap are merged.
    pub merge_gap: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            stream_threshold: 1e4,
            tie_tolerance: 1e-12,
            merge_gap: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `p = 1`.
    Linear,
    /// `p = 2`, kept apart so no `powf` is needed.
    Quadratic,
    Power(f64),
    /// `p = ∞`: `as ≤ r` and `b/s ≤ r`.
    Box,
}

impl Shape {
    fn degree(self) -> f64 {
        match self {
            Shape::Linear | Shape::Box => 1.0,
            Shape::Quadratic => 2.0,
            Shape::Power(p) => p,
        }
    }

    /// `(c/r)^q`, the coordinate in `u`-space.
    #[inline]
    fn lift(self, c: f64, r: f64) -> f64 {
        let t = c / r;
        match self {
            Shape::Linear | Shape::Box => t,
            Shape::Quadratic => t * t,
            Shape::Power(p) => t.powf(p),
        }
    }

    #[inline]
    fn unlift(self, u: f64) -> f64 {
        match self {
            Shape::Linear | Shape::Box => u,
            Shape::Quadratic => u.sqrt(),
            Shape::Power(p) => u.powf(1.0 / p),
        }
    }

    /// Membership interval in `u` for lifted coordinates `x`, `y`.
    #[inline]
    fn roots(self, x: f64, y: f64) -> Option<(f64, f64)> {
        if let Shape::Box = self {
            let exit = 1.0 / x;
            return if y <= exit * (1.0 + DISC_TOL) {
                Some((y, exit.max(y)))
            } else {
                None
            };
        }
        let d = 1.0 - 4.0 * x * y;
        if d < -DISC_TOL {
            return None;
        }
        let root = d.max(0.0).sqrt();
        let enter = 2.0 * y / (1.0 + root);
        let exit = (1.0 + root) / (2.0 * x);
        if enter <= exit {
            Some((enter, exit))
        } else {
            let mid = (y / x).sqrt();
            Some((mid, mid))
        }
    }

    /// Upper estimate of the largest `b` with an event in the column with
    /// lifted abscissa `x`.
    fn b_bound(self, x: f64, r: f64) -> f64 {
        match self {
            Shape::Box => r / x,
            _ => r * (4.0 * x).powf(-1.0 / self.degree()),
        }
    }
}

/// The event sweep for one point family. Lamé curves use the integer
/// lattice; the oscillator variant shifts both coordinates by one half.
#[derive(Debug, Clone)]
pub struct Sweep {
    shape: Shape,
    offset: f64,
    curve: Option<Curve>,
    options: SweepOptions,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    lo_open: bool,
    hi_open: bool,
    value: i64,
}

impl Piece {
    fn interval(&self) -> Interval {
        Interval {
            lo: self.lo,
            hi: self.hi,
            lo_open: self.lo_open,
            hi_open: self.hi_open,
        }
    }
}

impl Sweep {
    /// The sweep for `pcircle(p)`, `1 ≤ p ≤ ∞`.
    pub fn lame(p: f64) -> Result<Sweep> {
        let curve = Curve::lame(p)?;
        let shape = if p == 1.0 {
            Shape::Linear
        } else if p == 2.0 {
            Shape::Quadratic
        } else if p == f64::INFINITY {
            Shape::Box
        } else {
            Shape::Power(p)
        };
        Ok(Sweep {
            shape,
            offset: 0.0,
            curve: Some(curve),
            options: SweepOptions::default(),
        })
    }

    /// Points `(j − ½, k − ½)` under the line `as + b/s = E`.
    pub fn oscillator() -> Sweep {
        Sweep {
            shape: Shape::Linear,
            offset: 0.5,
            curve: None,
            options: SweepOptions::default(),
        }
    }

    pub fn with_options(mut self, options: SweepOptions) -> Sweep {
        self.options = options;
        self
    }

    pub fn options(&self) -> &SweepOptions {
        &self.options
    }

    fn coord(&self, i: u64) -> f64 {
        i as f64 - self.offset
    }

    /// Largest `k ≥ 1` for which column `x` has an event, or 0.
    fn kmax(&self, x: f64, r: f64) -> u64 {
        let valid = |k: u64| {
            k >= 1
                && self
                    .shape
                    .roots(x, self.shape.lift(self.coord(k), r))
                    .is_some()
        };
        let mut k = (self.shape.b_bound(x, r) + self.offset).floor().max(0.0) as u64;
        while k > 0 && !valid(k) {
            k -= 1;
        }
        while valid(k + 1) {
            k += 1;
        }
        k
    }

    fn jmax(&self, r: f64) -> u64 {
        // The column range is the row range of the swapped family.
        let y0 = self.shape.lift(self.coord(1), r);
        self.kmax(y0, r)
    }

    /// All membership intervals at radius `r`, in column-major order.
    pub fn events(&self, r: f64) -> Result<Vec<Event>> {
        ensure_positive("r", r)?;
        let mut out = Vec::new();
        for j in 1..=self.jmax(r) {
            let x = self.shape.lift(self.coord(j), r);
            for k in 1.. {
                let y = self.shape.lift(self.coord(k), r);
                match self.shape.roots(x, y) {
                    Some((u, v)) => out.push(Event {
                        j,
                        k,
                        s_enter: self.shape.unlift(u),
                        s_exit: self.shape.unlift(v),
                    }),
                    None => break,
                }
            }
        }
        Ok(out)
    }

    /// Axis points `(j, 0)` and `(0, k)` for `1 ≤ j, k ≤ axis_len` join the
    /// sweep in the closed quadrant. Every `s` outside the window they span
    /// already has more points inside than `𝒩(r, 1)`, so the truncation
    /// cannot change any minimiser, nor any sublevel set below `floor + 1`.
    fn axis_len(&self, r: f64, floor: u64) -> Result<u64> {
        match &self.curve {
            Some(curve) => Ok(count_unchecked(curve, r, 1.0, Quadrant::Nonnegative).max(floor)),
            None => Err(Error::InvalidParameter(
                "the closed-quadrant sweep needs an unshifted lattice".into(),
            )),
        }
    }

    #[inline]
    fn pair(&self, x: f64, k: u64, r: f64) -> Option<(f64, f64)> {
        self.shape.roots(x, self.shape.lift(self.coord(k), r))
    }

    /// Endpoints at or beyond `cut` (in `u`), and the number of points
    /// already inside at `u = cut`.
    fn materialize(&self, r: f64, axis: u64, cut: f64) -> (Vec<f64>, Vec<f64>, i64) {
        let mut enters = Vec::new();
        let mut exits = Vec::new();
        let mut inside = 0;
        let mut ys: Vec<f64> = Vec::new();
        for j in 1.. {
            let x = self.shape.lift(self.coord(j), r);
            match self.pair(x, 1, r) {
                Some((_, v)) if v >= cut => {}
                _ => break,
            }
            for k in 1.. {
                if ys.len() < k {
                    ys.push(self.shape.lift(self.coord(k as u64), r));
                }
                match self.shape.roots(x, ys[k - 1]) {
                    Some((u, v)) if v >= cut => {
                        if u >= cut {
                            enters.push(u);
                        } else {
                            inside += 1;
                        }
                        exits.push(v);
                    }
                    _ => break,
                }
            }
        }
        for i in 1..=axis {
            let exit = self.shape.lift(r, i as f64);
            if exit >= cut {
                inside += 1;
                exits.push(exit);
            }
            let enter = self.shape.lift(i as f64, r);
            if enter >= cut {
                enters.push(enter);
            } else {
                inside += 1;
            }
        }
        sort_positive(&mut enters);
        sort_positive(&mut exits);
        (enters, exits, inside)
    }

    /// Lazy counterpart of [`Sweep::materialize`], with one run per column.
    fn streams(&self, r: f64, axis: u64, cut: f64) -> (EventStream<'_>, EventStream<'_>, i64) {
        // Smallest k in [lo, hi] with pred(k), assuming monotonicity; hi + 1 if none.
        fn first(mut lo: u64, mut hi: u64, pred: impl Fn(u64) -> bool) -> u64 {
            hi += 1;
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if pred(mid) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        }
        let mut enter_runs = Vec::new();
        let mut exit_runs = Vec::new();
        let mut inside = 0;
        for j in 1.. {
            let x = self.shape.lift(self.coord(j), r);
            let kmax = self.kmax(x, r);
            let reach = |k: u64| self.pair(x, k, r).is_none_or(|(_, v)| v < cut);
            let last = first(1, kmax, reach) - 1;
            if last == 0 {
                break;
            }
            let start = first(1, last, |k| {
                self.pair(x, k, r).is_some_and(|(u, _)| u >= cut)
            });
            inside += (start - 1) as i64;
            if start <= last {
                enter_runs.push(Run::Enter {
                    x,
                    next: start,
                    last,
                });
            }
            exit_runs.push(Run::Exit { x, next: last });
        }
        if axis > 0 {
            let exit_last = first(1, axis, |i| self.shape.lift(r, i as f64) < cut) - 1;
            let enter_start = first(1, axis, |i| self.shape.lift(i as f64, r) >= cut);
            inside += exit_last as i64 + enter_start as i64 - 1;
            enter_runs.push(Run::AxisEnter {
                next: enter_start,
                last: axis,
            });
            exit_runs.push(Run::AxisExit { next: exit_last });
        }
        (
            EventStream::new(self, r, enter_runs),
            EventStream::new(self, r, exit_runs),
            inside,
        )
    }

    /// Feeds the step function of the count at radius `r` on `u ≥ 1` to
    /// `visit`, as alternating open gaps and breakpoints. Every supported
    /// family is symmetric under `s ↦ 1/s`, so this half determines the rest.
    fn scan<F: FnMut(Piece)>(&self, r: f64, closed: Option<u64>, mut visit: F) -> Result<()> {
        ensure_positive("r", r)?;
        let axis = match closed {
            Some(floor) => self.axis_len(r, floor)?,
            None => 0,
        };
        let tol = self.options.tie_tolerance * self.shape.degree();
        let cut = 1.0 - tol;
        let origin = i64::from(closed.is_some());
        // The walk starts at 0; re-anchor its first pieces at u = 1.
        let mut seen = 0;
        let mut near_one = false;
        let mut anchored = |mut piece: Piece| {
            seen += 1;
            if seen == 1 {
                if piece.hi <= 1.0 + tol {
                    near_one = true;
                    return;
                }
                piece.lo = 1.0;
                piece.lo_open = false;
            } else if near_one && seen <= 3 {
                piece.lo = 1.0;
                if seen == 2 {
                    piece.hi = 1.0;
                }
            }
            visit(piece);
        };
        if r >= self.options.stream_threshold {
            let (enters, exits, inside) = self.streams(r, axis, cut);
            walk(enters, exits, origin + inside, tol, &mut anchored);
        } else {
            let (enters, exits, inside) = self.materialize(r, axis, cut);
            walk(
                enters.iter().copied(),
                exits.iter().copied(),
                origin + inside,
                tol,
                &mut anchored,
            );
        }
        Ok(())
    }

    /// Reflects intervals found on `u ≥ 1` into `u ≤ 1`, converts to `s` and
    /// merges near-touching neighbours.
    fn finish(&self, half: Vec<Interval>) -> Vec<Interval> {
        let mut full: Vec<Interval> = Vec::with_capacity(2 * half.len());
        let mirror = |iv: &Interval| Interval {
            lo: 1.0 / iv.hi,
            hi: 1.0 / iv.lo,
            lo_open: iv.hi_open,
            hi_open: iv.lo_open,
        };
        for iv in half.iter().rev() {
            if iv.lo == 1.0 && !iv.lo_open {
                full.push(Interval {
                    lo: 1.0 / iv.hi,
                    lo_open: iv.hi_open,
                    ..*iv
                });
            } else {
                full.push(mirror(iv));
            }
        }
        for iv in &half {
            if !(iv.lo == 1.0 && !iv.lo_open) {
                full.push(*iv);
            }
        }
        let mut out: Vec<Interval> = Vec::with_capacity(full.len());
        for iv in full.into_iter().map(|iv| iv.map(|u| self.shape.unlift(u))) {
            if let Some(last) = out.last_mut() {
                let gap = iv.lo - last.hi;
                if gap > 0.0 && gap < self.options.merge_gap * (1.0 + last.hi.abs()) {
                    last.hi = iv.hi;
                    last.hi_open = iv.hi_open;
                    continue;
                }
            }
            out.push(iv);
        }
        out
    }

    fn extremum(&self, r: f64, closed: Option<u64>, maximize: bool) -> Result<StretchResult> {
        let mut best: Option<i64> = None;
        let mut intervals: Vec<Interval> = Vec::new();
        let mut extending = false;
        let mut pieces = 0usize;
        self.scan(r, closed, |piece| {
            pieces += 1;
            let better = match best {
                None => true,
                Some(b) => (maximize && piece.value > b) || (!maximize && piece.value < b),
            };
            if better {
                best = Some(piece.value);
                intervals.clear();
                intervals.push(piece.interval());
                extending = true;
            } else if Some(piece.value) == best {
                if extending {
                    let last = intervals.last_mut().expect("extending a recorded interval");
                    last.hi = piece.hi;
                    last.hi_open = piece.hi_open;
                } else {
                    intervals.push(piece.interval());
                }
                extending = true;
            } else {
                extending = false;
            }
        })?;
        let extremal_count = best.unwrap_or(0).max(0) as u64;
        if pieces == 1 {
            return Ok(StretchResult {
                r,
                extremal_count,
                intervals: Vec::new(),
                sup_s: None,
                every_s: true,
            });
        }
        let intervals = self.finish(intervals);
        let sup_s = intervals.last().map(|i| i.hi);
        Ok(StretchResult {
            r,
            extremal_count,
            intervals,
            sup_s,
            every_s: false,
        })
    }

    fn level_set(
        &self,
        r: f64,
        closed: Option<u64>,
        keep: impl Fn(i64) -> bool,
    ) -> Result<Vec<Interval>> {
        let mut intervals: Vec<Interval> = Vec::new();
        let mut extending = false;
        self.scan(r, closed, |piece| {
            if keep(piece.value) {
                match intervals.last_mut() {
                    Some(last) if extending => {
                        last.hi = piece.hi;
                        last.hi_open = piece.hi_open;
                    }
                    _ => intervals.push(piece.interval()),
                }
                extending = true;
            } else {
                extending = false;
            }
        })?;
        Ok(self.finish(intervals))
    }

    /// `max_s N(r, s)` and the set `S(r)` where it is attained.
    pub fn maximize(&self, r: f64) -> Result<StretchResult> {
        self.extremum(r, None, true)
    }

    /// `min_s 𝒩(r, s)` and the set `𝒮(r)` where it is attained.
    pub fn minimize_nonneg(&self, r: f64) -> Result<StretchResult> {
        self.extremum(r, Some(0), false)
    }

    /// `{s : N(r, s) ≥ n}`.
    pub fn superlevel(&self, r: f64, n: u64) -> Result<Vec<Interval>> {
        self.level_set(r, None, |v| v >= n as i64)
    }

    /// `{s : 𝒩(r, s) < n}`.
    pub fn sublevel_nonneg(&self, r: f64, n: u64) -> Result<Vec<Interval>> {
        self.level_set(r, Some(n), |v| v < n as i64)
    }
}

/// Sorts positive finite floats. One counting pass on the top 16 bits of
/// the bit pattern (exponent and leading mantissa, which order like the
/// values) scatters keys into buckets small enough to sort in cache.
fn sort_positive(values: &mut [f64]) {
    const SHIFT: u32 = 48;
    if values.len() < 1 << 14 {
        values.sort_unstable_by(f64::total_cmp);
        return;
    }
    let mut starts = vec![0usize; (1 << 16) + 1];
    for v in values.iter() {
        starts[(v.to_bits() >> SHIFT) as usize + 1] += 1;
    }
    for i in 1..starts.len() {
        starts[i] += starts[i - 1];
    }
    let mut fill = starts.clone();
    let mut keys = vec![0u64; values.len()];
    for v in values.iter() {
        let bits = v.to_bits();
        let d = (bits >> SHIFT) as usize;
        keys[fill[d]] = bits;
        fill[d] += 1;
    }
    for w in starts.windows(2) {
        if w[1] - w[0] > 1 {
            keys[w[0]..w[1]].sort_unstable();
        }
    }
    for (v, k) in values.iter_mut().zip(keys) {
        *v = f64::from_bits(k);
    }
}

/// Scans merged, sorted endpoint streams. Enters at a breakpoint count at
/// it; exits stop counting just beyond it.
fn walk<F: FnMut(Piece)>(
    enters: impl Iterator<Item = f64>,
    exits: impl Iterator<Item = f64>,
    initial: i64,
    tol: f64,
    visit: &mut F,
) {
    let mut enters = enters.peekable();
    let mut exits = exits.peekable();
    let mut value = initial;
    let mut prev = 0.0;
    loop {
        let t = match (enters.peek(), exits.peek()) {
            (None, None) => break,
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (Some(&a), Some(&b)) => a.min(b),
        };
        let limit = t + t * tol;
        let mut entering = 0;
        while enters.next_if(|&v| v <= limit).is_some() {
            entering += 1;
        }
        let mut leaving = 0;
        while exits.next_if(|&v| v <= limit).is_some() {
            leaving += 1;
        }
        visit(Piece {
            lo: prev,
            hi: t,
            lo_open: true,
            hi_open: true,
            value,
        });
        value += entering;
        visit(Piece {
            lo: t,
            hi: t,
            lo_open: false,
            hi_open: false,
            value,
        });
        value -= leaving;
        prev = t;
    }
    visit(Piece {
        lo: prev,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
        value,
    });
}

/// A run of endpoints that is increasing on its own.
#[derive(Debug, Clone, Copy)]
enum Run {
    /// Entries down one column, `k` increasing.
    Enter { x: f64, next: u64, last: u64 },
    /// Exits down one column, `k` decreasing.
    Exit { x: f64, next: u64 },
    /// `(0, k)` enters at `s = k/r`.
    AxisEnter { next: u64, last: u64 },
    /// `(j, 0)` exits at `s = r/j`, `j` decreasing.
    AxisExit { next: u64 },
}

/// k-way merge of [`Run`]s, so that memory stays proportional to the number
/// of columns.
struct EventStream<'a> {
    sweep: &'a Sweep,
    r: f64,
    runs: Vec<Run>,
    heap: BinaryHeap<Reverse<(u64, usize)>>,
}

impl<'a> EventStream<'a> {
    fn new(sweep: &'a Sweep, r: f64, runs: Vec<Run>) -> Self {
        let mut stream = EventStream {
            sweep,
            r,
            heap: BinaryHeap::with_capacity(runs.len()),
            runs,
        };
        for i in 0..stream.runs.len() {
            stream.advance(i);
        }
        stream
    }

    /// Pushes the next value of run `i`, if any.
    fn advance(&mut self, i: usize) {
        let shape = self.sweep.shape;
        let r = self.r;
        let value = match &mut self.runs[i] {
            Run::Enter { x, next, last } => {
                if *next > *last {
                    return;
                }
                let y = shape.lift(self.sweep.coord(*next), r);
                *next += 1;
                shape.roots(*x, y).map(|(u, _)| u)
            }
            Run::Exit { x, next } => {
                if *next == 0 {
                    return;
                }
                let y = shape.lift(self.sweep.coord(*next), r);
                *next -= 1;
                shape.roots(*x, y).map(|(_, v)| v)
            }
            Run::AxisEnter { next, last } => {
                if *next > *last {
                    return;
                }
                *next += 1;
                Some(shape.lift((*next - 1) as f64, r))
            }
            Run::AxisExit { next } => {
                if *next == 0 {
                    return;
                }
                *next -= 1;
                Some(shape.lift(r, (*next + 1) as f64))
            }
        };
        if let Some(v) = value {
            // Positive floats order like their bit patterns.
            self.heap.push(Reverse((v.to_bits(), i)));
        }
    }
}

impl Iterator for EventStream<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let Reverse((bits, i)) = self.heap.pop()?;
        self.advance(i);
        Some(f64::from_bits(bits))
    }
}

/// Membership intervals for the diamond at radius `r`.
pub fn events_p1(r: f64) -> Result<Vec<Event>> {
    Sweep::lame(1.0)?.events(r)
}

/// Membership intervals for `pcircle(p)` at radius `r`.
pub fn events_p(p: f64, r: f64) -> Result<Vec<Event>> {
    Sweep::lame(p)?.events(r)
}

/// `max_s N(r, s)` for `pcircle(p)`, with the maximising set.
pub fn maximize_count(p: f64, r: f64) -> Result<StretchResult> {
    Sweep::lame(p)?.maximize(r)
}

/// `min_s 𝒩(r, s)` for `pcircle(p)`, with the minimising set.
pub fn minimize_count_nonneg(p: f64, r: f64) -> Result<StretchResult> {
    Sweep::lame(p)?.minimize_nonneg(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count;
    use proptest::prelude::*;

    /// Membership interval by bisection on the two monotone branches of
    /// `φ(s) = (js)^p + (k/s)^p`.
    fn bisect_interval(p: f64, j: f64, k: f64, r: f64) -> Option<(f64, f64)> {
        let phi = |s: f64| (j * s).powf(p) + (k / s).powf(p) - r.powf(p);
        let star = (k / j).sqrt();
        if phi(star) > 1e-12 * r.powf(p) {
            return None;
        }
        let solve = |mut inside: f64, mut outside: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (inside + outside);
                if phi(mid) <= 1e-12 * r.powf(p) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        Some((solve(star, star * 1e-9), solve(star, star * 1e9)))
    }

    fn probe_oracle(p: f64, r: f64) -> (u64, Vec<(f64, u64)>) {
        let curve = Curve::lame(p).unwrap();
        let mut points: Vec<f64> = events_p(p, r)
            .unwrap()
            .iter()
            .flat_map(|e| [e.s_enter, e.s_exit])
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup_by(|b, a| *b <= *a * (1.0 + 1e-12));
        let mut probes = Vec::new();
        for (i, &t) in points.iter().enumerate() {
            probes.push(t);
            if let Some(&next) = points.get(i + 1) {
                probes.push(0.5 * (t + next));
            }
        }
        if let (Some(&first), Some(&last)) = (points.first(), points.last()) {
            probes.push(0.5 * first);
            probes.push(2.0 * last);
        }
        let counted: Vec<(f64, u64)> = probes
            .into_iter()
            .map(|s| (s, count(&curve, r, s, Quadrant::Positive).unwrap()))
            .collect();
        let best = counted.iter().map(|c| c.1).max().unwrap_or(0);
        (best, counted)
    }

    #[test]
    fn radix_sort_matches_std() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for len in [0, 5, 5000, 100_000] {
            let mut v: Vec<f64> = (0..len)
                .map(|_| 10f64.powf(rng.gen_range(-6.0..6.0)))
                .collect();
            v.extend_from_slice(&[1.0, 1.0, 2.5e-300, 7e300]);
            let mut expected = v.clone();
            expected.sort_by(f64::total_cmp);
            sort_positive(&mut v);
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn p1_event_example() {
        let r = 4.96;
        let events = events_p1(r).unwrap();
        assert_eq!(events.len(), 14);
        let e = events.iter().find(|e| (e.j, e.k) == (1, 1)).unwrap();
        let disc = (r * r - 4.0f64).sqrt();
        assert!((e.s_enter - (r - disc) / 2.0).abs() < 1e-12);
        assert!((e.s_exit - (r + disc) / 2.0).abs() < 1e-12);
        assert!((e.s_enter * e.s_exit - 1.0).abs() < 1e-12);
        for e in &events {
            let (j, k) = (e.j as f64, e.k as f64);
            assert!((e.s_enter * e.s_exit / (k / j) - 1.0).abs() < 1e-9);
            assert!(((e.s_enter + e.s_exit) / (r / j) - 1.0).abs() < 1e-9);
            assert!(e.s_enter <= e.s_exit);
        }
    }

    #[test]
    fn tangent_events_are_points() {
        let events = events_p1(2.0).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!((events[0].s_enter, events[0].s_exit), (1.0, 1.0));
        let events = events_p(2.0, 2f64.sqrt()).unwrap();
        assert_eq!(events.len(), 1);
        assert!((events[0].s_enter - 1.0).abs() < 1e-7 && (events[0].s_exit - 1.0).abs() < 1e-7);
    }

    #[test]
    fn pythagorean_root() {
        let e = events_p(2.0, 5.0)
            .unwrap()
            .into_iter()
            .find(|e| (e.j, e.k) == (3, 4))
            .unwrap();
        assert!(
            (e.s_enter - 1.0).abs() < 1e-9 || (e.s_exit - 1.0).abs() < 1e-9,
            "{e:?}"
        );
    }

    #[test]
    fn closed_form_matches_bisection() {
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            for r in [3.3, 10.0, 17.9] {
                let events = events_p(p, r).unwrap();
                let mut expected = 0;
                for j in 1..=(r * r) as u64 {
                    for k in 1..=(r * r) as u64 {
                        if let Some((lo, hi)) = bisect_interval(p, j as f64, k as f64, r) {
                            expected += 1;
                            let e = events
                                .iter()
                                .find(|e| (e.j, e.k) == (j, k))
                                .expect("event present");
                            // Bisection only resolves a tangency to about √ε.
                            let tol = if hi / lo - 1.0 < 1e-4 { 1e-5 } else { 1e-9 };
                            assert!((e.s_enter / lo - 1.0).abs() < tol, "p={p} r={r} {e:?} {lo}");
                            assert!((e.s_exit / hi - 1.0).abs() < tol, "p={p} r={r} {e:?} {hi}");
                        }
                    }
                }
                assert_eq!(events.len(), expected, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn event_count_p15_matches_enumeration() {
        let r: f64 = 10.0;
        let expected = (1..200u64)
            .flat_map(|j| (1..200u64).map(move |k| (j, k)))
            .filter(|&(j, k)| 2.0 * ((j * k) as f64).powf(0.75) <= r.powf(1.5))
            .count();
        assert_eq!(events_p(1.5, r).unwrap().len(), expected);
    }

    #[test]
    fn figure_radius_fixtures() {
        let res = maximize_count(1.0, 4.96).unwrap();
        assert_eq!(res.extremal_count, 9);
        assert!(res.contains(2f64.sqrt()));
        let res = maximize_count(2.0, 4.96).unwrap();
        assert_eq!(res.extremal_count, 16);
        assert!(res.contains(1.15));
    }

    #[test]
    fn single_tangency() {
        let res = maximize_count(1.0, 2.0).unwrap();
        assert_eq!(res.extremal_count, 1);
        assert_eq!(res.intervals, vec![Interval::point(1.0)]);
        assert_eq!(res.sup_s, Some(1.0));
    }

    #[test]
    fn no_events_flagged() {
        let res = maximize_count(2.0, 1.0).unwrap();
        assert!(res.every_s && res.intervals.is_empty());
        assert_eq!(res.extremal_count, 0);
    }

    #[test]
    fn square_minimum_matches_dense_grid() {
        let r = 3.5;
        let res = minimize_count_nonneg(f64::INFINITY, r).unwrap();
        let mut best = u64::MAX;
        for i in 1..200_000 {
            let s = 0.01 * 1.000_05f64.powi(i);
            if s > 400.0 {
                break;
            }
            let n = ((r / s).floor() as u64 + 1) * ((r * s).floor() as u64 + 1);
            best = best.min(n);
        }
        assert_eq!(res.extremal_count, best);
        let curve = Curve::square();
        for iv in &res.intervals {
            let mid = if iv.hi.is_finite() {
                0.5 * (iv.lo + iv.hi)
            } else {
                iv.lo + 1.0
            };
            assert_eq!(count(&curve, r, mid, Quadrant::Nonnegative).unwrap(), best);
        }
    }

    #[test]
    fn minimisers_agree_with_counts() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let curve = Curve::lame(p).unwrap();
            for r in [2.2, 5.5, 9.7, 14.1] {
                let res = minimize_count_nonneg(p, r).unwrap();
                let mut lo = f64::INFINITY;
                for iv in &res.intervals {
                    assert!(iv.hi.is_finite());
                    let s = 0.5 * (iv.lo + iv.hi);
                    assert_eq!(
                        count(&curve, r, s, Quadrant::Nonnegative).unwrap(),
                        res.extremal_count
                    );
                    lo = lo.min(iv.lo);
                }
                for i in 0..4000 {
                    let s = 0.02 * 1.002f64.powi(i);
                    assert!(
                        count(&curve, r, s, Quadrant::Nonnegative).unwrap() >= res.extremal_count
                    );
                }
            }
        }
    }

    #[test]
    fn streaming_matches_materialised() {
        let eager = SweepOptions::default();
        let lazy = SweepOptions {
            stream_threshold: 0.0,
            ..eager
        };
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            for r in [3.1, 12.7, 40.3] {
                let a = Sweep::lame(p).unwrap().with_options(eager);
                let b = Sweep::lame(p).unwrap().with_options(lazy);
                assert_eq!(
                    a.maximize(r).unwrap(),
                    b.maximize(r).unwrap(),
                    "p={p} r={r}"
                );
                assert_eq!(
                    a.minimize_nonneg(r).unwrap(),
                    b.minimize_nonneg(r).unwrap(),
                    "p={p} r={r}"
                );
            }
        }
        let a = Sweep::oscillator();
        let b = Sweep::oscillator().with_options(lazy);
        assert_eq!(a.maximize(9.3).unwrap(), b.maximize(9.3).unwrap());
    }

    #[test]
    fn counter_returns_to_zero() {
        let sweep = Sweep::lame(1.0).unwrap();
        let mut last = None;
        sweep
            .scan(23.4, None, |piece| last = Some(piece.value))
            .unwrap();
        assert_eq!(last, Some(0));
    }

    #[test]
    fn level_sets() {
        let sweep = Sweep::lame(2.0).unwrap();
        let curve = Curve::pcircle(2.0).unwrap();
        let r = 11.3;
        let best = sweep.maximize(r).unwrap().extremal_count;
        let upper = sweep.superlevel(r, best - 2).unwrap();
        let lower = sweep.sublevel_nonneg(r, 120).unwrap();
        for i in 0..3000 {
            let s = 0.05 * 1.0015f64.powi(i);
            let n = count(&curve, r, s, Quadrant::Positive).unwrap();
            assert_eq!(
                upper.iter().any(|iv| iv.contains(s)),
                n >= best - 2,
                "s={s}"
            );
            let n = count(&curve, r, s, Quadrant::Nonnegative).unwrap();
            assert_eq!(lower.iter().any(|iv| iv.contains(s)), n < 120, "s={s}");
        }
    }

    #[test]
    fn circle_envelope_at_large_radius() {
        for r in [100.0, 150.5, 211.7] {
            let res = maximize_count(2.0, r).unwrap();
            assert!(res.sup_s.unwrap() <= 4.5);
            assert!(res.inf_s().unwrap() >= 1.0 / 4.5);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(maximize_count(0.5, 3.0).is_err());
        assert!(maximize_count(2.0, -3.0).is_err());
        assert!(Sweep::oscillator().minimize_nonneg(3.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sweep_matches_probe_oracle(pi in 0usize..4, r in 1.0f64..30.0) {
            let p = [1.0, 1.5, 2.0, 3.0][pi];
            let res = maximize_count(p, r).unwrap();
            let (best, probes) = probe_oracle(p, r);
            prop_assert_eq!(res.extremal_count, best);
            for (s, n) in probes {
                prop_assert_eq!(res.contains_within(s, 1e-12), n == best, "s={} n={}", s, n);
            }
        }

        #[test]
        fn optimal_set_is_reciprocal_symmetric(pi in 0usize..4, r in 2.0f64..40.0) {
            let p = [1.0, 1.5, 2.0, 3.0][pi];
            for res in [maximize_count(p, r).unwrap(), minimize_count_nonneg(p, r).unwrap()] {
                let ivs = &res.intervals;
                let n = ivs.len();
                for (a, b) in ivs.iter().zip(ivs.iter().rev()) {
                    prop_assert!((a.lo * b.hi - 1.0).abs() < 1e-9, "{:?} {:?}", a, b);
                    prop_assert!((a.hi * b.lo - 1.0).abs() < 1e-9);
                }
                prop_assert!(n > 0);
            }
        }

        #[test]
        fn maximum_nondecreasing_in_r(pi in 0usize..4, r in 1.0f64..40.0, dr in 0.0f64..3.0) {
            let p = [1.0, 1.5, 2.0, 3.0][pi];
            prop_assert!(maximize_count(p, r).unwrap().extremal_count <= maximize_count(p, r + dr).unwrap().extremal_count);
        }
    }
}
