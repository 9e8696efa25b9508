//! Point generation: Gray-code streaming and a per-point oracle.
//!
//! Both generators keep the coordinate as an exact integer `Y = sum_k y_k b^(E-1-k)` and emit
//! `Y / b^E`, so the two produce bit-identical coordinates for the same digit vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::gf::PrimeBase;
use crate::netgen::NetDesign;

/// One step of the base-`b` reflected Gray code: digit `t` moves by `inc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrayStep {
    pub t: usize,
    pub inc: i8,
}

/// Streaming iterator over the `b^m - 1` steps of the reflected base-`b` Gray code.
#[derive(Debug, Clone)]
pub struct GraySteps {
    b: u8,
    digits: Vec<u8>,
    dirs: Vec<i8>,
    remaining: usize,
}

impl GraySteps {
    pub fn new(b: u8, m: usize) -> Self {
        let total = (b as usize).pow(m as u32);
        GraySteps { b, digits: vec![0; m], dirs: vec![1; m], remaining: total - 1 }
    }
}

impl Iterator for GraySteps {
    type Item = GrayStep;

    fn next(&mut self) -> Option<GrayStep> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let top = self.b - 1;
        for t in 0..self.digits.len() {
            let d = self.digits[t];
            let inc = self.dirs[t];
            if (inc > 0 && d < top) || (inc < 0 && d > 0) {
                self.digits[t] = (d as i16 + inc as i16) as u8;
                return Some(GrayStep { t, inc });
            }
            self.dirs[t] = -inc;
        }
        None
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for GraySteps {}

pub fn gray_steps(b: u8, m: usize) -> Vec<GrayStep> {
    GraySteps::new(b, m).collect()
}

/// `N x s` coordinates stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    base: PrimeBase,
    n_points: usize,
    s: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn from_coords(base: PrimeBase, n_points: usize, s: usize, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), n_points * s);
        PointSet { base, n_points, s, coords }
    }

    #[inline]
    pub fn base(&self) -> PrimeBase {
        self.base
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.s..(i + 1) * self.s]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.s.max(1))
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Rows in lexicographic order, for order-free comparison.
    pub fn sorted_rows(&self) -> Vec<&[f64]> {
        let mut rows: Vec<&[f64]> = self.iter().collect();
        rows.sort_unstable_by(|a, c| a.partial_cmp(c).expect("coordinates are finite"));
        rows
    }
}

struct Layout {
    b: u64,
    weights: Vec<u64>,
    scale: f64,
}

impl Layout {
    fn new(design: &NetDesign) -> Self {
        let b = design.base().get() as u64;
        let e = design.precision();
        let mut weights = vec![0u64; e];
        let mut w = 1u64;
        for k in (0..e).rev() {
            weights[k] = w;
            w *= b;
        }
        Layout { b, weights, scale: w as f64 }
    }

    #[inline]
    fn value(&self, y: &[u8]) -> u64 {
        y.iter().zip(&self.weights).map(|(&d, &w)| d as u64 * w).sum()
    }

    #[inline]
    fn coordinate(&self, y: u64) -> f64 {
        // y < 2^53, so the signed conversion is exact
        y as i64 as f64 / self.scale
    }
}

/// Digits `< b` in 4-bit lanes of `u64` words, lane `i` of word `w` holding the digit of weight
/// `b^(16 w + i)`, with lane-parallel addition mod `b`.
struct Lanes {
    e: usize,
    words: usize,
    b: u64,
    bias: u64,
    // powers b^2, b^4, b^8, b^16
    p2: u64,
    p4: u64,
    p8: u64,
    p16: u64,
}

const NIBBLES: u64 = 0x1111_1111_1111_1111;

type Packed = [u64; 3];

impl Lanes {
    fn new(layout: &Layout) -> Option<Self> {
        let b = layout.b;
        let e = layout.weights.len();
        if !(3..=7).contains(&b) || e > 48 {
            return None;
        }
        let p2 = b * b;
        Some(Lanes {
            e,
            words: e.div_ceil(16),
            b,
            bias: (8 - b) * NIBBLES,
            p2,
            p4: p2 * p2,
            p8: p2 * p2 * p2 * p2,
            p16: (p2 * p2 * p2 * p2).pow(2),
        })
    }

    /// Packs digits given most significant first.
    fn pack(&self, digits: impl Iterator<Item = u64>) -> Packed {
        let mut out = [0u64; 3];
        for (k, d) in digits.enumerate() {
            let i = self.e - 1 - k;
            out[i / 16] |= d << ((i % 16) * 4);
        }
        out
    }

    #[inline]
    fn add_assign(&self, state: &mut Packed, col: &Packed) {
        for (st, &c) in state[..self.words].iter_mut().zip(col) {
            let v = *st + c;
            let over = ((v + self.bias) >> 3) & NIBBLES;
            *st = v - over * self.b;
        }
    }

    /// The integer `sum_i digit_i b^i`, by pairwise radix merging within each word.
    #[inline]
    fn value(&self, state: &Packed) -> u64 {
        let mut y = 0;
        for &x in state[..self.words].iter().rev() {
            let x = (x & 0x0f0f_0f0f_0f0f_0f0f) + ((x >> 4) & 0x0f0f_0f0f_0f0f_0f0f) * self.b;
            let x = (x & 0x00ff_00ff_00ff_00ff) + ((x >> 8) & 0x00ff_00ff_00ff_00ff) * self.p2;
            let x = (x & 0x0000_ffff_0000_ffff) + ((x >> 16) & 0x0000_ffff_0000_ffff) * self.p4;
            let x = (x & 0xffff_ffff) + (x >> 32) * self.p8;
            y = y * self.p16 + x;
        }
        y
    }
}

/// Grid value of the shift of coordinate `j`, or 0 without shift.
fn shift_value(design: &NetDesign, layout: &Layout, j: usize) -> u64 {
    design.shifts().map_or(0, |sh| layout.value(&sh[j]))
}

/// Calls `visit(n, x_n)` for each point in Gray order, where `n` is the running index.
pub fn for_each_point_gray<F: FnMut(usize, &[f64])>(design: &NetDesign, mut visit: F) {
    let layout = Layout::new(design);
    let s = design.dim();
    let e = design.precision();
    let m = design.m();
    let mut x = vec![0.0; s];

    if layout.b == 2 {
        // column_bits[j][t]: digits of column t packed at the grid weights
        let column_bits: Vec<Vec<u64>> =
            design.matrices().iter().map(|c| (0..m).map(|t| layout.value(&c.column(t))).collect()).collect();
        let mut y: Vec<u64> = (0..s).map(|j| shift_value(design, &layout, j)).collect();
        for j in 0..s {
            x[j] = layout.coordinate(y[j]);
        }
        visit(0, &x);
        for (n, step) in GraySteps::new(2, m).enumerate() {
            for j in 0..s {
                y[j] ^= column_bits[j][step.t];
                x[j] = layout.coordinate(y[j]);
            }
            visit(n + 1, &x);
        }
        return;
    }

    if let Some(lanes) = Lanes::new(&layout) {
        let b = layout.b;
        // cols[j][t][sign]: column t of C_j, negated mod b when stepping down
        let cols: Vec<Vec<[Packed; 2]>> = design
            .matrices()
            .iter()
            .map(|c| {
                (0..m)
                    .map(|t| {
                        let col = c.column(t);
                        let up = lanes.pack(col.iter().map(|&v| v as u64));
                        let down = lanes.pack(col.iter().map(|&v| (b - v as u64) % b));
                        [up, down]
                    })
                    .collect()
            })
            .collect();
        let mut state: Vec<Packed> = (0..s)
            .map(|j| match design.shifts() {
                Some(sh) => lanes.pack(sh[j].iter().map(|&v| v as u64)),
                None => [0; 3],
            })
            .collect();
        for j in 0..s {
            x[j] = layout.coordinate(lanes.value(&state[j]));
        }
        visit(0, &x);
        for (n, step) in GraySteps::new(b as u8, m).enumerate() {
            let sign = usize::from(step.inc < 0);
            for j in 0..s {
                lanes.add_assign(&mut state[j], &cols[j][step.t][sign]);
                x[j] = layout.coordinate(lanes.value(&state[j]));
            }
            visit(n + 1, &x);
        }
        return;
    }

    let b = layout.b;
    // sparse[j][t][sign]: nonzero digits (k, c) of column t, with c replaced by b - c when stepping down
    let sparse: Vec<Vec<[Vec<(usize, u64)>; 2]>> = design
        .matrices()
        .iter()
        .map(|c| {
            (0..m)
                .map(|t| {
                    let col = c.column(t);
                    let up: Vec<(usize, u64)> =
                        col.iter().enumerate().filter(|&(_, &v)| v != 0).map(|(k, &v)| (k, v as u64)).collect();
                    let down = up.iter().map(|&(k, v)| (k, b - v)).collect();
                    [up, down]
                })
                .collect()
        })
        .collect();
    let mut digits: Vec<Vec<u64>> = match design.shifts() {
        Some(sh) => sh.iter().map(|d| d.iter().map(|&v| v as u64).collect()).collect(),
        None => vec![vec![0; e]; s],
    };
    let mut y: Vec<u64> = digits.iter().map(|d| d.iter().zip(&layout.weights).map(|(&v, &w)| v * w).sum()).collect();
    for j in 0..s {
        x[j] = layout.coordinate(y[j]);
    }
    visit(0, &x);
    let weights = &layout.weights;
    for (n, step) in GraySteps::new(b as u8, m).enumerate() {
        let sign = usize::from(step.inc < 0);
        for j in 0..s {
            let state = &mut digits[j];
            let mut yj = y[j];
            for &(k, c) in &sparse[j][step.t][sign] {
                let v = state[k] + c;
                let wrap = u64::from(v >= b);
                state[k] = v - wrap * b;
                yj = yj + c * weights[k] - wrap * b * weights[k];
            }
            y[j] = yj;
            x[j] = layout.coordinate(yj);
        }
        visit(n + 1, &x);
    }
}

/// All points in Gray order.
pub fn gen_points_gray(design: &NetDesign) -> PointSet {
    let s = design.dim();
    let n = design.n_points();
    let mut coords = Vec::with_capacity(n * s);
    for_each_point_gray(design, |_, x| coords.extend_from_slice(x));
    PointSet { base: design.base(), n_points: n, s, coords }
}

/// Base-`b` digits of `n`, least significant first, padded to `len`.
pub fn index_digits(n: u64, b: u8, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    let mut v = n;
    for d in out.iter_mut() {
        *d = (v % b as u64) as u8;
        v /= b as u64;
    }
    out
}

/// Digit vectors `y_{n,j} = C_j n ⊕ d_j` of point `n`, one per coordinate.
pub fn point_digits(design: &NetDesign, n: u64) -> Vec<Vec<u8>> {
    let b = design.base();
    let nd = index_digits(n, b.get(), design.m());
    design
        .matrices()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let mut y = crate::gf::mat_vec(c, &nd).expect("m columns");
            if let Some(sh) = design.shifts() {
                for (yk, &dk) in y.iter_mut().zip(&sh[j]) {
                    *yk = b.add(*yk, dk);
                }
            }
            y
        })
        .collect()
}

/// All points in natural index order, one matrix-vector product per coordinate.
pub fn gen_points_naive(design: &NetDesign) -> PointSet {
    let layout = Layout::new(design);
    let b = design.base().get() as usize;
    let s = design.dim();
    let e = design.precision();
    let m = design.m();
    let n = design.n_points();
    // columns[(j * m + r) * e..][..e]: digits of column r of C_j
    let mut columns = Vec::with_capacity(s * m * e);
    for c in design.matrices() {
        for r in 0..m {
            columns.extend(c.column(r).iter().map(|&v| v as u32));
        }
    }
    let shifts: Vec<u32> = match design.shifts() {
        Some(sh) => sh.iter().flat_map(|d| d.iter().map(|&v| v as u32)).collect(),
        None => vec![0; s * e],
    };
    let max_acc = m * (b - 1) * (b - 1) + (b - 1);
    let mut coords = Vec::with_capacity(n * s);
    let mut nd = vec![0u32; m];
    let next_index = |nd: &mut [u32], i: usize| {
        if i > 0 {
            for d in nd.iter_mut() {
                *d += 1;
                if (*d as usize) < b {
                    break;
                }
                *d = 0;
            }
        }
    };

    if let Some(lanes) = Lanes::new(&layout) {
        // index digits in blocks of h, each block's partial product C_j[:, block] n_block tabulated
        let mut h = 1;
        while b.pow(h as u32 + 1) <= 1024 {
            h += 1;
        }
        let radices: Vec<usize> = (0..m).step_by(h).map(|r0| b.pow((m - r0).min(h) as u32)).collect();
        let mut offsets = Vec::with_capacity(s * radices.len());
        let mut tables: Vec<Packed> = Vec::new();
        let mut sum = vec![0u32; e];
        for j in 0..s {
            for (q, &radix) in radices.iter().enumerate() {
                offsets.push(tables.len());
                for v in 0..radix {
                    sum.iter_mut().for_each(|a| *a = 0);
                    let mut rest = v;
                    for r in q * h..(q * h + h).min(m) {
                        let d = (rest % b) as u32;
                        rest /= b;
                        let col = &columns[(j * m + r) * e..(j * m + r + 1) * e];
                        for (a, &c) in sum.iter_mut().zip(col) {
                            *a += d * c;
                        }
                    }
                    tables.push(lanes.pack(sum.iter().map(|&a| (a as usize % b) as u64)));
                }
            }
        }
        let packed_shifts: Vec<Packed> =
            (0..s).map(|j| lanes.pack(shifts[j * e..(j + 1) * e].iter().map(|&v| v as u64))).collect();
        coords.resize(n * s, 0.0);
        let mut blocks = vec![0usize; radices.len()];
        for j in 0..s {
            let own = &offsets[j * radices.len()..(j + 1) * radices.len()];
            blocks.iter_mut().for_each(|v| *v = 0);
            for i in 0..n {
                if i > 0 {
                    for (v, &radix) in blocks.iter_mut().zip(&radices) {
                        *v += 1;
                        if *v < radix {
                            break;
                        }
                        *v = 0;
                    }
                }
                let mut acc = packed_shifts[j];
                for (&v, &at) in blocks.iter().zip(own) {
                    lanes.add_assign(&mut acc, &tables[at + v]);
                }
                coords[i * s + j] = layout.coordinate(lanes.value(&acc));
            }
        }
    } else {
        let reduce: Vec<u64> = (0..=max_acc).map(|v| (v % b) as u64).collect();
        let mut acc = vec![0u32; e];
        for i in 0..n {
            next_index(&mut nd, i);
            for j in 0..s {
                acc.copy_from_slice(&shifts[j * e..(j + 1) * e]);
                for (r, &d) in nd.iter().enumerate() {
                    if d == 0 {
                        continue;
                    }
                    let col = &columns[(j * m + r) * e..(j * m + r + 1) * e];
                    for (a, &c) in acc.iter_mut().zip(col) {
                        *a += d * c;
                    }
                }
                let y: u64 = acc.iter().zip(&layout.weights).map(|(&a, &w)| reduce[a as usize] * w).sum();
                coords.push(layout.coordinate(y));
            }
        }
    }
    PointSet { base: design.base(), n_points: n, s, coords }
}
