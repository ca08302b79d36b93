//! Generator matrices of base-2 digital nets and their quality parameters.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf2::{intersect_row_spaces, BitMatrix, XorBasis};
use crate::rng::{substream, Stream};

/// Largest supported `m`; rows and columns fit in one machine word.
pub const MAX_M: usize = 64;

const FILE_MAGIC: &str = "dignet v1";

/// The generator matrices `C_1, …, C_s`, each `m × m`.
///
/// Entry `(r, c)` of `C_j` (0-based) multiplies bit `c` of the point index
/// (bit 0 least significant) and contributes to fractional digit `r + 1`.
#[derive(Clone)]
pub struct GeneratorSet {
    m: usize,
    matrices: Vec<BitMatrix>,
    rows: Vec<Vec<u64>>,
    cols: Vec<Vec<u64>>,
    t: OnceLock<usize>,
    triple: OnceLock<Option<(usize, usize, usize)>>,
}

/// Quality parameters of a generator set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetQuality {
    pub m: usize,
    pub s: usize,
    pub t: usize,
    /// Triple row-space intersection parameter; only defined for `s = 3`.
    #[serde(rename = "T")]
    pub big_t: Option<usize>,
    /// Smallest `ℓ₁+ℓ₂+ℓ₃` with a nontrivial triple intersection, and the
    /// first triple attaining it.
    pub minimal_nontrivial_sum: Option<usize>,
    pub witness: Option<(usize, usize, usize)>,
}

impl PartialEq for GeneratorSet {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.matrices == other.matrices
    }
}

impl Eq for GeneratorSet {}

impl std::fmt::Debug for GeneratorSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl GeneratorSet {
    pub fn new(matrices: Vec<BitMatrix>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidParameter("a net needs at least one coordinate".into()));
        };
        let m = first.rows();
        if m > MAX_M {
            return Err(Error::InvalidParameter(format!("m = {m} exceeds {MAX_M}")));
        }
        for (j, c) in matrices.iter().enumerate() {
            if c.rows() != m || c.cols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is {}x{}, expected {m}x{m}",
                    j + 1,
                    c.rows(),
                    c.cols()
                )));
            }
        }
        let rows = matrices
            .iter()
            .map(|c| (0..m).map(|r| c.row_word(r)).collect())
            .collect();
        let cols = matrices
            .iter()
            .map(|c| {
                (0..m)
                    .map(|col| (0..m).fold(0u64, |w, r| w | (u64::from(c.get(r, col)) << r)))
                    .collect()
            })
            .collect();
        Ok(Self {
            m,
            matrices,
            rows,
            cols,
            t: OnceLock::new(),
            triple: OnceLock::new(),
        })
    }

    fn from_row_words(m: usize, rows: Vec<Vec<u64>>) -> Self {
        let matrices = rows.iter().map(|r| BitMatrix::from_row_words(r, m)).collect();
        Self::new(matrices).expect("row words have consistent shape")
    }

    /// All `C_j = I_m`.
    pub fn identity(m: usize, s: usize) -> Result<Self> {
        check_shape(m, s)?;
        Self::new(vec![BitMatrix::identity(m); s])
    }

    /// Independent fair bits for every entry, from the seeded stream.
    pub fn random(m: usize, s: usize, seed: u64) -> Result<Self> {
        Self::random_with(m, s, &mut substream(seed, Stream::Generators, 0))
    }

    pub fn random_with<R: RngCore + ?Sized>(m: usize, s: usize, rng: &mut R) -> Result<Self> {
        check_shape(m, s)?;
        let mask = low_mask(m);
        let rows = (0..s)
            .map(|_| (0..m).map(|_| rng.next_u64() & mask).collect())
            .collect();
        Ok(Self::from_row_words(m, rows))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.matrices[j]
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.matrices
    }

    /// Row `r` (0-based) of `C_j` as a word; bit `c` is entry `(r, c)`.
    pub fn row_word(&self, j: usize, r: usize) -> u64 {
        self.rows[j][r]
    }

    /// Column `c` (0-based) of `C_j` as a word; bit `r` is entry `(r, c)`.
    pub fn col_word(&self, j: usize, c: usize) -> u64 {
        self.cols[j][c]
    }

    /// `Σ_r v_r C_j(r, :)` for the row selection `v` (bit `r` picks row `r`).
    pub fn combine_rows(&self, j: usize, mut v: u64) -> u64 {
        let mut acc = 0;
        while v != 0 {
            acc ^= self.rows[j][v.trailing_zeros() as usize];
            v &= v - 1;
        }
        acc
    }

    /// The stacked matrix `C^q` of the first `q_j` rows of each `C_j`.
    pub fn stacked_rows(&self, q: &[usize]) -> Result<BitMatrix> {
        if q.len() != self.s() {
            return Err(Error::DimensionMismatch(format!(
                "composition has {} parts for s = {}",
                q.len(),
                self.s()
            )));
        }
        if let Some(&bad) = q.iter().find(|&&qj| qj > self.m) {
            return Err(Error::InvalidParameter(format!("q_j = {bad} exceeds m = {}", self.m)));
        }
        let tops: Vec<BitMatrix> = q
            .iter()
            .zip(&self.matrices)
            .map(|(&qj, c)| c.top_rows(qj))
            .collect();
        BitMatrix::vstack(&tops.iter().collect::<Vec<_>>())
    }

    /// Quality parameter `t`, cached after the first call.
    pub fn t_value(&self) -> usize {
        *self.t.get_or_init(|| {
            (0..=self.m)
                .rev()
                .find(|&d| self.prefixes_independent(d))
                .map_or(self.m, |d| self.m - d)
        })
    }

    /// Every composition of `d` keeps its stacked rows independent.
    ///
    /// Walks compositions depth-first, extending one shared basis per prefix.
    /// Any dependency found along the way belongs to some full composition of
    /// `d`, so the walk stops at the first one.
    fn prefixes_independent(&self, d: usize) -> bool {
        fn walk(net: &GeneratorSet, j: usize, rem: usize, basis: XorBasis) -> bool {
            let rows = &net.rows[j];
            if j + 1 == net.s() {
                let mut b = basis;
                return rem <= net.m && rows[..rem].iter().all(|&r| b.insert(r));
            }
            let mut b = basis;
            for q in 0..=rem.min(net.m) {
                if q > 0 && !b.insert(rows[q - 1]) {
                    return false;
                }
                if !walk(net, j + 1, rem - q, b) {
                    return false;
                }
            }
            true
        }
        d <= self.m && walk(self, 0, d, XorBasis::new())
    }

    /// `t` by eliminating each stacked matrix `C^q` separately.
    ///
    /// Much slower than [`GeneratorSet::t_value`]; kept as an independent check.
    pub fn t_value_by_compositions(&self) -> usize {
        let s = self.s();
        for t in 0..=self.m {
            let d = self.m - t;
            let ok = compositions(d, s, self.m).all(|q| {
                self.stacked_rows(&q)
                    .map(|a| a.rank() == d)
                    .unwrap_or(false)
            });
            if ok {
                return t;
            }
        }
        self.m
    }

    /// Dimension of `Row(C₁,ℓ₁) ∩ Row(C₂,ℓ₂) ∩ Row(C₃,ℓ₃)`.
    pub fn intersection_rank(&self, l1: usize, l2: usize, l3: usize) -> Result<usize> {
        self.require_three()?;
        let ls = [l1, l2, l3];
        if let Some(&l) = ls.iter().find(|&&l| l > self.m) {
            return Err(Error::InvalidParameter(format!("row count {l} exceeds m = {}", self.m)));
        }
        let tops: Vec<BitMatrix> = ls
            .iter()
            .zip(&self.matrices)
            .map(|(&l, c)| c.top_rows(l))
            .collect();
        Ok(intersect_row_spaces(&tops)?.rows())
    }

    /// First triple `(ℓ₁,ℓ₂,ℓ₃)`, `1 ≤ ℓ_j ≤ m`, of smallest sum whose
    /// leading row spaces meet nontrivially.
    pub fn triple_intersection_witness(&self) -> Result<Option<(usize, usize, usize)>> {
        self.require_three()?;
        if let Some(w) = self.triple.get() {
            return Ok(*w);
        }
        let m = self.m;
        let mut found = None;
        'sums: for sum in 3..=3 * m {
            for l1 in 1..=m {
                for l2 in 1..=m {
                    let Some(l3) = sum.checked_sub(l1 + l2) else { continue };
                    if !(1..=m).contains(&l3) {
                        continue;
                    }
                    if self.intersection_rank(l1, l2, l3)? > 0 {
                        found = Some((l1, l2, l3));
                        break 'sums;
                    }
                }
            }
        }
        Ok(*self.triple.get_or_init(|| found))
    }

    /// `T = max(0, 2m − S* + 1)` where `S*` is the smallest sum with a
    /// nontrivial triple intersection; 0 when there is none.
    pub fn big_t_value(&self) -> Result<usize> {
        Ok(match self.triple_intersection_witness()? {
            Some((a, b, c)) => (2 * self.m + 1).saturating_sub(a + b + c),
            None => 0,
        })
    }

    pub fn quality(&self) -> Result<NetQuality> {
        let (big_t, witness) = if self.s() == 3 && self.m >= 1 {
            (Some(self.big_t_value()?), self.triple_intersection_witness()?)
        } else {
            (None, None)
        };
        Ok(NetQuality {
            m: self.m,
            s: self.s(),
            t: self.t_value(),
            big_t,
            minimal_nontrivial_sum: witness.map(|(a, b, c)| a + b + c),
            witness,
        })
    }

    fn require_three(&self) -> Result<()> {
        if self.s() != 3 {
            return Err(Error::InvalidParameter(format!(
                "triple intersections need s = 3, got s = {}",
                self.s()
            )));
        }
        Ok(())
    }

    /// Canonical text form; see [`GeneratorSet::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{FILE_MAGIC} m={} s={}\n", self.m, self.s());
        for (j, c) in self.matrices.iter().enumerate() {
            if j > 0 {
                out.push('\n');
            }
            for r in 0..self.m {
                for col in 0..self.m {
                    out.push(if c.get(r, col) { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses `dignet v1 m=<m> s=<s>` followed by `s` blocks of `m` rows of
    /// `0`/`1`, blocks separated by one blank line. `origin` labels errors.
    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let (m, s) = parse_header(header).map_err(|msg| err(1, msg))?;
        let mut matrices = Vec::with_capacity(s);
        let mut last_line = 1;
        for j in 0..s {
            if j > 0 {
                match lines.next() {
                    Some((_, "")) => {}
                    Some((n, l)) => {
                        return Err(err(n, format!("expected blank line before matrix {}, found {l:?}", j + 1)))
                    }
                    None => return Err(err(last_line + 1, format!("missing matrix {}", j + 1))),
                }
            }
            let mut c = BitMatrix::zeros(m, m);
            for r in 0..m {
                let (n, l) = lines
                    .next()
                    .ok_or_else(|| err(last_line + 1, format!("matrix {} ends after {r} rows, expected {m}", j + 1)))?;
                last_line = n;
                if l.chars().count() != m {
                    return Err(err(n, format!("row has {} entries, expected {m}", l.chars().count())));
                }
                for (col, ch) in l.chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => c.set(r, col, true),
                        other => return Err(err(n, format!("unexpected character {other:?} in column {}", col + 1))),
                    }
                }
            }
            matrices.push(c);
        }
        if let Some((n, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(n, format!("unexpected trailing content {l:?}")));
        }
        Self::new(matrices)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Embeds a `(t ≤ 1, m−1, 3)` base into `m × m` matrices that still give
    /// `t ≤ 2` but whose row `m/2` is the same unit vector in every coordinate.
    pub fn embed_counterexample(base: &GeneratorSet) -> Result<Self> {
        if base.s() != 3 {
            return Err(Error::InvalidParameter(format!("base needs s = 3, got s = {}", base.s())));
        }
        let m = base.m + 1;
        if !m.is_multiple_of(2) || m < 2 {
            return Err(Error::InvalidParameter(format!("embedded m = {m} must be even and at least 2")));
        }
        if m > MAX_M {
            return Err(Error::InvalidParameter(format!("m = {m} exceeds {MAX_M}")));
        }
        let bt = base.t_value();
        if bt > 1 {
            return Err(Error::InvalidParameter(format!("base has t = {bt}, need t ≤ 1")));
        }
        let r = m / 2;
        // base index r-1 (0-based) becomes r, everything from there shifts by one
        let spread = |w: u64| {
            let low = w & low_mask(r - 1);
            let high = w >> (r - 1);
            low | (high << r)
        };
        let rows = (0..3)
            .map(|j| {
                let mut out = Vec::with_capacity(m);
                out.extend((0..r - 1).map(|q| spread(base.row_word(j, q))));
                out.push(1u64 << (r - 1));
                out.extend((r - 1..base.m).map(|q| spread(base.row_word(j, q))));
                out
            })
            .collect();
        Ok(Self::from_row_words(m, rows))
    }

    /// Seeded backtracking search for generator matrices with quality `≤ t`.
    ///
    /// Rows are filled level by level across coordinates; a candidate row is
    /// kept only if every partial composition it completes stays independent.
    /// Gives up after `budget` candidate rows have been tried.
    pub fn search(m: usize, s: usize, t: usize, seed: u64, budget: u64) -> Result<Self> {
        check_shape(m, s)?;
        if t > m {
            return Err(Error::InvalidParameter(format!("t = {t} exceeds m = {m}")));
        }
        let d = m - t;
        let mut rng = substream(seed, Stream::Search, 0);
        let mut rows: Vec<Vec<u64>> = vec![Vec::with_capacity(m); s];
        let mut tried = 0u64;
        let slots: Vec<(usize, usize)> = (0..d).flat_map(|l| (0..s).map(move |j| (l, j))).collect();
        let candidates: Vec<u64> = (1..=low_mask(m)).collect();

        // iterative backtracking: one shuffled candidate list and cursor per slot
        let mut stack: Vec<(Vec<u64>, usize)> = Vec::with_capacity(slots.len());
        let fresh = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut c = candidates.clone();
            c.shuffle(rng);
            (c, 0usize)
        };
        if !slots.is_empty() {
            stack.push(fresh(&mut rng));
        }
        while !stack.is_empty() {
            let depth = stack.len() - 1;
            let (_, j) = slots[depth];
            let top = &mut stack[depth];
            let mut placed = false;
            while top.1 < top.0.len() {
                if tried >= budget {
                    return Err(Error::SearchExhausted(format!(
                        "no ({t},{m},{s}) generator set found within {budget} candidate rows"
                    )));
                }
                tried += 1;
                let cand = top.0[top.1];
                top.1 += 1;
                rows[j].push(cand);
                if partial_ok(&rows, j, d) {
                    placed = true;
                    break;
                }
                rows[j].pop();
            }
            if placed {
                if stack.len() == slots.len() {
                    break;
                }
                stack.push(fresh(&mut rng));
            } else {
                stack.pop();
                if let Some(&(_, pj)) = stack.len().checked_sub(1).and_then(|i| slots.get(i)) {
                    rows[pj].pop();
                } else {
                    return Err(Error::SearchExhausted(format!(
                        "no ({t},{m},{s}) generator set exists"
                    )));
                }
            }
        }
        let mask = low_mask(m);
        for r in rows.iter_mut() {
            while r.len() < m {
                r.push(rng.random::<u64>() & mask);
            }
        }
        let net = Self::from_row_words(m, rows);
        debug_assert!(net.t_value() <= t);
        Ok(net)
    }
}

/// Checks every composition with `q_j = rows[j].len()`, other parts bounded by
/// the rows placed so far, and total at most `d`.
fn partial_ok(rows: &[Vec<u64>], j: usize, d: usize) -> bool {
    fn walk(rows: &[Vec<u64>], skip: usize, i: usize, rem: usize, basis: XorBasis) -> bool {
        if i == rows.len() {
            return true;
        }
        if i == skip {
            return walk(rows, skip, i + 1, rem, basis);
        }
        let mut b = basis;
        let cap = rows[i].len().min(rem);
        for q in 0..=cap {
            if q > 0 && !b.insert(rows[i][q - 1]) {
                return false;
            }
            if !walk(rows, skip, i + 1, rem - q, b) {
                return false;
            }
        }
        true
    }
    let own = &rows[j];
    if own.len() > d {
        return true;
    }
    let mut basis = XorBasis::new();
    own.iter().all(|&r| basis.insert(r)) && walk(rows, j, 0, d - own.len(), basis)
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), String> {
    let rest = line
        .strip_prefix(FILE_MAGIC)
        .ok_or_else(|| format!("expected header starting with {FILE_MAGIC:?}"))?;
    let mut m = None;
    let mut s = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("malformed header field {field:?}"))?;
        let v: usize = value
            .parse()
            .map_err(|_| format!("header field {key} has non-numeric value {value:?}"))?;
        match key {
            "m" => m = Some(v),
            "s" => s = Some(v),
            _ => return Err(format!("unknown header field {key:?}")),
        }
    }
    let m = m.ok_or("header lacks m=")?;
    let s = s.ok_or("header lacks s=")?;
    if s == 0 {
        return Err("s must be at least 1".into());
    }
    if m > MAX_M {
        return Err(format!("m = {m} exceeds {MAX_M}"));
    }
    Ok((m, s))
}

fn check_shape(m: usize, s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    if m > MAX_M {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds {MAX_M}")));
    }
    Ok(())
}

pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// All `q ∈ {0..=cap}^s` with `Σ q = d`, in lexicographic order.
pub fn compositions(d: usize, s: usize, cap: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut out = Vec::new();
    fn rec(d: usize, s: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == s {
            if d <= cap {
                cur.push(d);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for q in 0..=d.min(cap) {
            cur.push(q);
            rec(d - q, s, cap, cur, out);
            cur.pop();
        }
    }
    if s > 0 {
        rec(d, s, cap, &mut Vec::with_capacity(s), &mut out);
    }
    out.into_iter()
}
