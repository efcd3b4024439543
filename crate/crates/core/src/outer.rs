//! Outer linear codes, full-weight counting and the AG parameter planner.
//!
//! Each outer codeword names one block of the composed code: coordinate `k`
//! of the codeword selects which inner node that block uses at sub-block `k`.
//! Two blocks whose codewords agree at `k` share an inner node there, and that
//! is what makes a helper compulsory. Codewords of full weight, taken as
//! differences from the failed block's codeword, are exactly the helpers
//! that never need to be contacted.
//!
//! Reed-Solomon codes (genus 0) are the only instantiation built here. The
//! counting bound and planner keep the genus as a free parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{is_prime, Field, FieldElement, Matrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterCode {
    field: Field,
    length: usize,
    dimension: usize,
    generator: Matrix,
    /// Enumerated codewords; index `i` encodes the message whose base-`q`
    /// digits (least significant first) are the coefficients of `i`.
    codewords: Vec<Vec<u32>>,
    weight_distribution: Vec<u64>,
}

/// Largest outer code that will be enumerated.
pub const MAX_ENUMERATED: usize = 1 << 22;

impl OuterCode {
    /// Reed-Solomon code: row `j` of the generator evaluates `x^j` on the
    /// points `0, 1, ..., length - 1`.
    pub fn reed_solomon(q: u32, length: usize, dimension: usize) -> Result<Self> {
        let field = Field::new(q as u64)?;
        if length > q as usize {
            return Err(Error::NotEnoughEvaluationPoints {
                length,
                available: q as usize,
            });
        }
        if length == 0 || dimension > length {
            return Err(Error::InvalidParameters(format!(
                "need 0 <= K <= N and N >= 1, got N={length}, K={dimension}"
            )));
        }
        let mut generator = Matrix::zeros(dimension, length);
        for j in 0..dimension {
            for x in 0..length {
                generator.set(j, x, field.pow(field.elem(x as u64), j as u64));
            }
        }
        OuterCode::from_generator(q, generator)
    }

    /// Any linear code given by a `K x N` generator over GF(q).
    pub fn from_generator(q: u32, generator: Matrix) -> Result<Self> {
        let field = Field::new(q as u64)?;
        let dimension = generator.rows();
        let length = generator.cols();
        if generator.rank(&field) != dimension {
            return Err(Error::InvalidParameters(
                "generator rows are dependent".into(),
            ));
        }
        let size = (q as usize)
            .checked_pow(dimension as u32)
            .filter(|&m| m <= MAX_ENUMERATED)
            .ok_or_else(|| {
                Error::InvalidParameters(format!("q^K = {q}^{dimension} too large to enumerate"))
            })?;

        let mut codewords = Vec::with_capacity(size);
        let mut weight_distribution = vec![0u64; length + 1];
        for idx in 0..size {
            let mut word = vec![FieldElement::ZERO; length];
            let mut rest = idx;
            for j in 0..dimension {
                let m = field.elem((rest % q as usize) as u64);
                rest /= q as usize;
                if m.is_zero() {
                    continue;
                }
                for (x, w) in word.iter_mut().enumerate() {
                    *w = field.add(*w, field.mul(m, generator.get(j, x)));
                }
            }
            let word: Vec<u32> = word.into_iter().map(FieldElement::value).collect();
            weight_distribution[word.iter().filter(|&&v| v != 0).count()] += 1;
            codewords.push(word);
        }

        if dimension > 0 {
            for x in 0..length {
                if codewords.iter().all(|w| w[x] == 0) {
                    return Err(Error::InvalidParameters(format!(
                        "coordinate {x} is identically zero"
                    )));
                }
            }
        }

        Ok(OuterCode {
            field,
            length,
            dimension,
            generator,
            codewords,
            weight_distribution,
        })
    }

    pub fn q(&self) -> u32 {
        self.field.modulus()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of codewords, `q^K`.
    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn codewords(&self) -> &[Vec<u32>] {
        &self.codewords
    }

    pub fn codeword(&self, i: usize) -> &[u32] {
        &self.codewords[i]
    }

    /// Inner node used by codeword `i` at coordinate `x`. Field value `v`
    /// maps to node `v` (1-based column `v + 1`).
    pub fn column(&self, i: usize, x: usize) -> usize {
        self.codewords[i][x] as usize
    }

    /// `A_w` for `w = 0..=N`.
    pub fn weight_distribution(&self) -> &[u64] {
        &self.weight_distribution
    }

    /// Minimum distance, `None` for the zero code.
    pub fn distance(&self) -> Option<usize> {
        self.weight_distribution
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &c)| c > 0)
            .map(|(w, _)| w)
    }

    pub fn relative_distance(&self) -> f64 {
        self.distance()
            .map_or(0.0, |d| d as f64 / self.length as f64)
    }

    /// Number of codewords of Hamming weight `N`.
    pub fn full_weight(&self) -> u64 {
        self.weight_distribution[self.length]
    }

    /// Number of coordinates where codewords `a` and `b` differ.
    pub fn difference_weight(&self, a: usize, b: usize) -> usize {
        self.codewords[a]
            .iter()
            .zip(&self.codewords[b])
            .filter(|(x, y)| x != y)
            .count()
    }
}

pub fn build_rs_outer(q: u32, length: usize, dimension: usize) -> Result<OuterCode> {
    OuterCode::reed_solomon(q, length, dimension)
}

pub fn full_weight_count(code: &OuterCode) -> u64 {
    code.full_weight()
}

fn binomial(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Lower bound on the number of full-weight codewords of an `[N, K]` AG code
/// of genus `g` over GF(q): the inclusion-exclusion sum truncated after
/// `K - g` terms, minus the tail bound `C(N, K-g+1) * q^g`.
///
/// Requires `q > (N - (K-g+1)) / (K-g+2)` so the tail terms decrease.
pub fn fw_lower_bound(length: u64, dimension: u64, genus: u64, q: u64) -> Result<i128> {
    if genus > dimension {
        return Err(Error::BoundInapplicable(format!(
            "genus {genus} exceeds dimension {dimension}"
        )));
    }
    let m = (dimension - genus) as i128;
    let lhs = q as i128 * (m + 2);
    let rhs = length as i128 - (m + 1);
    if lhs <= rhs {
        return Err(Error::BoundInapplicable(format!(
            "q = {q} does not exceed ({length} - {}) / {}",
            m + 1,
            m + 2
        )));
    }
    let overflow = || Error::BoundInapplicable("bound overflows 128-bit arithmetic".into());
    let pow = |e: u64| (q as i128).checked_pow(e as u32).ok_or_else(overflow);
    let mut sum: i128 = 0;
    for p in 0..=(dimension - genus) {
        let term = binomial(length, p)
            .checked_mul(pow(dimension - p)?)
            .ok_or_else(overflow)?;
        sum = if p % 2 == 0 { sum + term } else { sum - term };
    }
    let tail = binomial(length, dimension - genus + 1)
        .checked_mul(pow(genus)?)
        .ok_or_else(overflow)?;
    Ok(sum - tail)
}

/// Parameters of an AG outer code family for a target `(r, epsilon, u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub r: u32,
    pub epsilon: f64,
    pub u: u32,
    /// `2 (u+1)^2 r^2 / epsilon^2`; `q` must exceed it.
    pub threshold: f64,
    /// Smallest square prime power above the threshold.
    pub q_min: u64,
    /// `sqrt(q_min)`, itself a prime power.
    pub q_min_root: u64,
    /// Required relative distance `1 - epsilon / (r - 1)`.
    pub delta_min: f64,
    /// Asymptotic `g / N` for optimal towers, `1 / (sqrt(q) - 1)`.
    pub genus_ratio: f64,
    /// Dimension per unit genus: `K = u * g`.
    pub dimension_per_genus: u32,
    /// The number of full-weight codewords is at least `q^(exponent * K)`.
    pub full_weight_exponent: f64,
    /// Whether `(u+1)/(sqrt(q)-1) <= epsilon/(r-1)` holds at `q_min`.
    pub distance_condition: bool,
    pub notes: Vec<String>,
}

impl PlanParams {
    /// Upper bound on compulsory helpers, `N - N^((u-1)/u)`, for `N` blocks.
    pub fn compulsory_bound(&self, blocks: f64) -> f64 {
        blocks - blocks.powf(self.full_weight_exponent)
    }

    /// Field size needed for the composed code with outer dimension `K`:
    /// `q^K * q * r + 1`.
    pub fn field_size_lower_bound(&self, dimension: u32) -> Option<u128> {
        (self.q_min as u128)
            .checked_pow(dimension + 1)?
            .checked_mul(self.r as u128)?
            .checked_add(1)
    }

    /// Sub-packetization `N * s^q` of the composed code.
    pub fn sub_packetization(&self, length: u64, s: u64) -> Option<u128> {
        (s as u128)
            .checked_pow(u32::try_from(self.q_min).ok()?)?
            .checked_mul(length as u128)
    }
}

fn is_prime_power(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..=n)
        .find(|&d| n.is_multiple_of(d))
        .expect("n >= 2 has a divisor");
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1 && is_prime(p)
}

/// Plans the outer code family for target redundancy `r`, slack `epsilon` and
/// exponent parameter `u > 3`.
pub fn ag_plan(r: u32, epsilon: f64, u: u32) -> Result<PlanParams> {
    if u <= 3 {
        return Err(Error::InvalidU(u));
    }
    if r < 2 || epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "need r >= 2 and epsilon > 0, got r={r}, epsilon={epsilon}"
        )));
    }
    let threshold = 2.0 * ((u + 1) as f64).powi(2) * (r as f64).powi(2) / epsilon.powi(2);
    let mut root = threshold.sqrt().floor().max(1.0) as u64;
    while (root * root) as f64 <= threshold || !is_prime_power(root) {
        root += 1;
    }
    let q_min = root * root;
    let sqrt_q = root as f64;
    let genus_ratio = 1.0 / (sqrt_q - 1.0);
    let delta_min = 1.0 - epsilon / (r as f64 - 1.0);
    let distance_condition = (u as f64 + 1.0) * genus_ratio <= epsilon / (r as f64 - 1.0);
    Ok(PlanParams {
        r,
        epsilon,
        u,
        threshold,
        q_min,
        q_min_root: root,
        delta_min,
        genus_ratio,
        dimension_per_genus: u,
        full_weight_exponent: (u as f64 - 1.0) / u as f64,
        distance_condition,
        notes: vec![
            format!(
                "K = {u} * g; D >= N - deg(G) with K = deg(G) - g + 1 once 2g - 2 < deg(G) < N"
            ),
            format!("compulsory helpers <= N_blocks - N_blocks^({}/{u})", u - 1),
            "sub-packetization N * s^q grows as O(log N_blocks) for fixed s, q, u".into(),
            "field size q^K * q * r + 1 grows as O(N_blocks) for fixed r, q".into(),
        ],
    })
}

/// Dimension and designed distance of an AG code of length `N`, genus `g`,
/// divisor degree `m`, valid for `2g - 2 < m < N`.
pub fn ag_code_parameters(length: u64, genus: u64, degree: u64) -> Result<(u64, u64)> {
    if 2 * genus > degree + 1 || degree >= length || degree + 1 < genus {
        return Err(Error::InvalidParameters(format!(
            "need 2g - 2 < deg(G) < N, got g={genus}, deg(G)={degree}, N={length}"
        )));
    }
    Ok((degree + 1 - genus, length - degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates all of GF(q)^K independently of `OuterCode`.
    fn brute_distribution(q: u64, n: usize, k: usize) -> Vec<u64> {
        let mut dist = vec![0u64; n + 1];
        for idx in 0..q.pow(k as u32) {
            let coeffs: Vec<u64> = (0..k).map(|j| (idx / q.pow(j as u32)) % q).collect();
            let weight = (0..n as u64)
                .filter(|&x| {
                    let v = coeffs
                        .iter()
                        .enumerate()
                        .map(|(j, &c)| c * x.pow(j as u32) % q)
                        .sum::<u64>();
                    v % q != 0
                })
                .count();
            dist[weight] += 1;
        }
        dist
    }

    #[test]
    fn desk_reed_solomon() {
        let c = build_rs_outer(5, 4, 2).unwrap();
        assert_eq!(c.size(), 25);
        assert_eq!(c.distance(), Some(3));
        assert_eq!(
            c.generator()
                .row(0)
                .iter()
                .map(|v| v.value())
                .collect::<Vec<_>>(),
            vec![1, 1, 1, 1]
        );
        assert_eq!(
            c.generator()
                .row(1)
                .iter()
                .map(|v| v.value())
                .collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(c.weight_distribution(), &[1, 0, 0, 16, 8]);
        assert_eq!(brute_distribution(5, 4, 2), vec![1, 0, 0, 16, 8]);
        assert_eq!(full_weight_count(&c), 8);
        assert_eq!(c.codeword(0), &[0, 0, 0, 0]);
    }

    #[test]
    fn small_cases() {
        let rep = build_rs_outer(5, 4, 1).unwrap();
        assert_eq!(rep.distance(), Some(4));
        assert_eq!(rep.full_weight(), 4);

        let zero = build_rs_outer(5, 3, 0).unwrap();
        assert_eq!(zero.size(), 1);
        assert_eq!(zero.full_weight(), 0);
        assert_eq!(zero.distance(), None);

        assert_eq!(build_rs_outer(5, 1, 1).unwrap().full_weight(), 4);
        assert_eq!(
            build_rs_outer(3, 4, 2),
            Err(Error::NotEnoughEvaluationPoints {
                length: 4,
                available: 3
            })
        );
    }

    #[test]
    fn generator_with_dead_coordinate_rejected() {
        let f = Field::new(5).unwrap();
        let g = Matrix::from_rows(&f, &[vec![1, 0, 1]]).unwrap();
        assert!(matches!(
            OuterCode::from_generator(5, g),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn bound_examples() {
        // 25 - 4*5 + 6 - C(4,3) = 7
        assert_eq!(fw_lower_bound(4, 2, 0, 5), Ok(7));
        // K = g: q^K - C(N,1) q^g
        assert_eq!(fw_lower_bound(4, 2, 2, 5), Ok(25 - 4 * 25));
        assert!(matches!(
            fw_lower_bound(20, 1, 0, 2),
            Err(Error::BoundInapplicable(_))
        ));
        assert!(matches!(
            fw_lower_bound(4, 1, 2, 5),
            Err(Error::BoundInapplicable(_))
        ));
    }

    #[test]
    fn plan_examples() {
        let p = ag_plan(3, 0.5, 4).unwrap();
        assert_eq!(p.threshold, 1800.0);
        assert_eq!(p.q_min, 1849);
        assert_eq!(p.q_min_root, 43);
        assert_eq!(p.delta_min, 0.75);
        assert!(p.distance_condition);
        assert!((p.genus_ratio - 1.0 / 42.0).abs() < 1e-12);

        let p = ag_plan(2, 0.3, 5).unwrap();
        assert!((p.delta_min - 0.7).abs() < 1e-12);

        assert_eq!(ag_plan(3, 0.5, 3), Err(Error::InvalidU(3)));
        assert!(ag_plan(3, 0.0, 4).is_err());
    }

    #[test]
    fn plan_accepts_square_prime_powers() {
        // threshold = 2 * 25 * 4 / 4 = 50 -> 8^2 = 64 is the first square prime power above.
        let p = ag_plan(2, 2.0, 4).unwrap();
        assert_eq!(p.q_min, 64);
        assert_eq!(p.q_min_root, 8);
    }

    #[test]
    fn ag_parameters() {
        assert_eq!(ag_code_parameters(10, 1, 4), Ok((4, 6)));
        assert!(ag_code_parameters(10, 3, 3).is_err());
        assert!(ag_code_parameters(10, 0, 10).is_err());
    }

    proptest! {
        #[test]
        fn rs_invariants(q in prop::sample::select(vec![2u32, 3, 5, 7, 11]), n in 1usize..8, k in 1usize..4) {
            prop_assume!(n <= q as usize && k <= n);
            prop_assume!((q as usize).pow(k as u32) <= 3000);
            let c = build_rs_outer(q, n, k).unwrap();
            prop_assert_eq!(c.distance(), Some(n - k + 1));
            prop_assert_eq!(c.weight_distribution().to_vec(), brute_distribution(q as u64, n, k));

            let m = c.size();
            for x in 0..n {
                let mut counts = vec![0usize; q as usize];
                for w in c.codewords() {
                    counts[w[x] as usize] += 1;
                }
                prop_assert!(counts.iter().all(|&cnt| cnt == m / q as usize));
            }

            let set: std::collections::HashSet<&Vec<u32>> = c.codewords().iter().collect();
            for a in c.codewords().iter().step_by(3) {
                for b in c.codewords().iter().step_by(5) {
                    let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| (x + y) % q).collect();
                    prop_assert!(set.contains(&sum));
                }
            }
        }

        #[test]
        fn bound_never_exceeds_enumeration(
            q in prop::sample::select(vec![2u32, 3, 5, 7, 11, 13]),
            n in 1usize..9,
            k in 1usize..4,
            g in 0usize..4,
        ) {
            prop_assume!(n <= q as usize && k <= n && g <= k);
            prop_assume!((q as usize).pow(k as u32) <= 3000);
            let c = build_rs_outer(q, n, k).unwrap();
            if let Ok(bound) = fw_lower_bound(n as u64, k as u64, g as u64, q as u64) {
                prop_assert!(bound <= c.full_weight() as i128, "bound {} > W {}", bound, c.full_weight());
            }
        }
    }
}
