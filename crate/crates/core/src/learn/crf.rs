//! Tree-structured CRF over the five label slots.
//!
//! The tree has edges START→L, L→S, L→O, L→P and S→V. A tuple's score is
//! the sum of its slot scores and the five table entries it touches.

use ndarray::Array2;

use super::Real;
use crate::error::{invalid, Error, Result};
use crate::labels::{LabelTuple, Slot};

const L: usize = 0;
const S: usize = 1;
const O: usize = 2;
const P: usize = 3;
const V: usize = 4;

/// Table names in storage order.
pub const TABLE_NAMES: [&str; 5] = ["start_l", "ls", "lo", "lp", "sv"];

/// Per-entry permission for each table; `false` entries score −∞.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfMask {
    pub tables: [Array2<bool>; 5],
}

impl CrfMask {
    pub fn allow_all(sizes: [usize; 5]) -> CrfMask {
        CrfMask {
            tables: table_shapes(sizes).map(|shape| Array2::from_elem(shape, true)),
        }
    }
}

fn table_shapes(sz: [usize; 5]) -> [(usize, usize); 5] {
    [
        (1, sz[L]),
        (sz[L], sz[S]),
        (sz[L], sz[O]),
        (sz[L], sz[P]),
        (sz[S], sz[V]),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeCrf<F = f64> {
    /// Vocabulary sizes in slot order (l, s, o, p, v).
    pub sizes: [usize; 5],
    /// `start_l`, `ls`, `lo`, `lp`, `sv`.
    pub tables: [Array2<F>; 5],
    pub mask: Option<CrfMask>,
    /// Restrict decoding to tuples satisfying [`LabelTuple::satisfies_constraints`].
    pub hard_constraints: bool,
}

/// Exact node and edge marginals of the CRF distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals<F = f64> {
    pub log_partition: F,
    pub nodes: [Vec<F>; 5],
    /// Same layout as [`TreeCrf::tables`].
    pub edges: [Array2<F>; 5],
}

fn lse<F: Real>(values: impl Iterator<Item = F>) -> F {
    let v: Vec<F> = values.collect();
    let m = v.iter().copied().fold(F::neg_infinity(), F::max);
    if m == F::neg_infinity() {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp()).fold(F::zero(), |a, b| a + b).ln()
}

/// Maximum and its lowest index.
fn argmax<F: Real>(values: impl Iterator<Item = F>) -> (usize, F) {
    let mut best = (0, F::neg_infinity());
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

impl<F: Real> TreeCrf<F> {
    pub fn new(sizes: [usize; 5]) -> TreeCrf<F> {
        TreeCrf {
            sizes,
            tables: table_shapes(sizes).map(Array2::zeros),
            mask: None,
            hard_constraints: false,
        }
    }

    /// CRF over the label vocabularies.
    pub fn for_labels() -> TreeCrf<F> {
        TreeCrf::new(Slot::ALL.map(Slot::size))
    }

    pub fn score_len(&self) -> usize {
        self.sizes.iter().sum()
    }

    fn offsets(&self) -> [usize; 5] {
        let mut out = [0; 5];
        for k in 1..5 {
            out[k] = out[k - 1] + self.sizes[k - 1];
        }
        out
    }

    fn split<'a>(&self, scores: &'a [F]) -> Result<[&'a [F]; 5]> {
        if scores.len() != self.score_len() {
            return invalid(format!(
                "score vector has length {}, expected {}",
                scores.len(),
                self.score_len()
            ));
        }
        let off = self.offsets();
        Ok(std::array::from_fn(|k| &scores[off[k]..off[k] + self.sizes[k]]))
    }

    /// Table entry, or −∞ where masked.
    fn w(&self, table: usize, i: usize, j: usize) -> F {
        match &self.mask {
            Some(m) if !m.tables[table][[i, j]] => F::neg_infinity(),
            _ => self.tables[table][[i, j]],
        }
    }

    /// Score of one tuple given as indices (l, s, o, p, v).
    pub fn tuple_score(&self, scores: &[F], idx: [usize; 5]) -> Result<F> {
        let t = self.split(scores)?;
        let [l, s, o, p, v] = idx;
        Ok(t[L][l]
            + t[S][s]
            + t[O][o]
            + t[P][p]
            + t[V][v]
            + self.w(0, 0, l)
            + self.w(1, l, s)
            + self.w(2, l, o)
            + self.w(3, l, p)
            + self.w(4, s, v))
    }

    /// Inward sum-product messages: (m_v→s, m_s→l, m_o→l, m_p→l).
    fn messages(&self, t: &[&[F]; 5]) -> [Vec<F>; 4] {
        let sz = self.sizes;
        let m_vs: Vec<F> = (0..sz[S])
            .map(|s| lse((0..sz[V]).map(|v| t[V][v] + self.w(4, s, v))))
            .collect();
        let m_sl = (0..sz[L])
            .map(|l| lse((0..sz[S]).map(|s| t[S][s] + self.w(1, l, s) + m_vs[s])))
            .collect();
        let m_ol = (0..sz[L])
            .map(|l| lse((0..sz[O]).map(|o| t[O][o] + self.w(2, l, o))))
            .collect();
        let m_pl = (0..sz[L])
            .map(|l| lse((0..sz[P]).map(|p| t[P][p] + self.w(3, l, p))))
            .collect();
        [m_vs, m_sl, m_ol, m_pl]
    }

    /// log Σ over all tuples of exp(score), by inward message passing.
    pub fn log_partition(&self, scores: &[F]) -> Result<F> {
        let t = self.split(scores)?;
        let [_, m_sl, m_ol, m_pl] = self.messages(&t);
        Ok(lse(
            (0..self.sizes[L]).map(|l| t[L][l] + self.w(0, 0, l) + m_sl[l] + m_ol[l] + m_pl[l])
        ))
    }

    pub fn marginals(&self, scores: &[F]) -> Result<Marginals<F>> {
        let t = self.split(scores)?;
        let sz = self.sizes;
        let [m_vs, m_sl, m_ol, m_pl] = self.messages(&t);
        let root: Vec<F> = (0..sz[L]).map(|l| t[L][l] + self.w(0, 0, l)).collect();
        let log_z = lse((0..sz[L]).map(|l| root[l] + m_sl[l] + m_ol[l] + m_pl[l]));

        let mut edges = table_shapes(sz).map(Array2::zeros);
        let mut nodes: [Vec<F>; 5] = sz.map(|n| vec![F::zero(); n]);
        for l in 0..sz[L] {
            let p_l = (root[l] + m_sl[l] + m_ol[l] + m_pl[l] - log_z).exp();
            nodes[L][l] = p_l;
            edges[0][[0, l]] = p_l;
            for s in 0..sz[S] {
                let p = (root[l] + m_ol[l] + m_pl[l] + self.w(1, l, s) + t[S][s] + m_vs[s] - log_z).exp();
                edges[1][[l, s]] = p;
                nodes[S][s] = nodes[S][s] + p;
            }
            for o in 0..sz[O] {
                let p = (root[l] + m_sl[l] + m_pl[l] + self.w(2, l, o) + t[O][o] - log_z).exp();
                edges[2][[l, o]] = p;
                nodes[O][o] = nodes[O][o] + p;
            }
            for pp in 0..sz[P] {
                let p = (root[l] + m_sl[l] + m_ol[l] + self.w(3, l, pp) + t[P][pp] - log_z).exp();
                edges[3][[l, pp]] = p;
                nodes[P][pp] = nodes[P][pp] + p;
            }
        }
        // Outward message into S from the rest of the tree.
        let out_s: Vec<F> = (0..sz[S])
            .map(|s| lse((0..sz[L]).map(|l| root[l] + m_ol[l] + m_pl[l] + self.w(1, l, s))))
            .collect();
        for s in 0..sz[S] {
            for v in 0..sz[V] {
                let p = (out_s[s] + t[S][s] + self.w(4, s, v) + t[V][v] - log_z).exp();
                edges[4][[s, v]] = p;
                nodes[V][v] = nodes[V][v] + p;
            }
        }
        Ok(Marginals {
            log_partition: log_z,
            nodes,
            edges,
        })
    }

    /// Negative log-likelihood of `gold`. Adds `weight` times its gradient
    /// to `d_scores` and to the tables of `d_crf`.
    pub fn loss_and_grad(
        &self,
        scores: &[F],
        gold: [usize; 5],
        weight: F,
        d_scores: &mut [F],
        d_crf: &mut TreeCrf<F>,
    ) -> Result<F> {
        let loss = self.loss(scores, gold)?;
        let m = self.marginals(scores)?;
        let off = self.offsets();
        for k in 0..5 {
            for (i, p) in m.nodes[k].iter().enumerate() {
                let indicator = if gold[k] == i { F::one() } else { F::zero() };
                d_scores[off[k] + i] = d_scores[off[k] + i] + weight * (*p - indicator);
            }
        }
        for (d, e) in d_crf.tables.iter_mut().zip(&m.edges) {
            d.scaled_add(weight, e);
        }
        let [l, s, o, p, v] = gold;
        for (table, (i, j)) in [(0, l), (l, s), (l, o), (l, p), (s, v)].into_iter().enumerate() {
            d_crf.tables[table][[i, j]] = d_crf.tables[table][[i, j]] - weight;
        }
        Ok(loss)
    }

    /// Cross entropy of the CRF distribution against `gold`.
    pub fn loss(&self, scores: &[F], gold: [usize; 5]) -> Result<F> {
        for (k, (&g, &n)) in gold.iter().zip(&self.sizes).enumerate() {
            if g >= n {
                return invalid(format!("gold index {g} out of range for slot {k} of size {n}"));
            }
        }
        Ok(self.log_partition(scores)? - self.tuple_score(scores, gold)?)
    }

    /// Highest-scoring tuple (l, s, o, p, v) and its joint score. Ties go to
    /// the lowest index at each argmax.
    pub fn decode(&self, scores: &[F]) -> Result<([usize; 5], F)> {
        if self.hard_constraints {
            return self.decode_constrained(scores);
        }
        let t = self.split(scores)?;
        let sz = self.sizes;
        let best_v: Vec<(usize, F)> = (0..sz[S])
            .map(|s| argmax((0..sz[V]).map(|v| t[V][v] + self.w(4, s, v))))
            .collect();
        let best_s: Vec<(usize, F)> = (0..sz[L])
            .map(|l| argmax((0..sz[S]).map(|s| t[S][s] + self.w(1, l, s) + best_v[s].1)))
            .collect();
        let best_o: Vec<(usize, F)> = (0..sz[L])
            .map(|l| argmax((0..sz[O]).map(|o| t[O][o] + self.w(2, l, o))))
            .collect();
        let best_p: Vec<(usize, F)> = (0..sz[L])
            .map(|l| argmax((0..sz[P]).map(|p| t[P][p] + self.w(3, l, p))))
            .collect();
        let (l, score) =
            argmax((0..sz[L]).map(|l| t[L][l] + self.w(0, 0, l) + best_s[l].1 + best_o[l].1 + best_p[l].1));
        if score == F::neg_infinity() {
            return Err(Error::InfeasibleDecode);
        }
        let s = best_s[l].0;
        Ok(([l, s, best_o[l].0, best_p[l].0, best_v[s].0], score))
    }

    /// Exact search restricted to constraint-satisfying tuples; the label
    /// space is small enough to enumerate.
    fn decode_constrained(&self, scores: &[F]) -> Result<([usize; 5], F)> {
        if self.sizes != Slot::ALL.map(Slot::size) {
            return invalid("hard constraints need the label vocabularies");
        }
        self.split(scores)?;
        let mut best: Option<([usize; 5], F)> = None;
        for idx in tuples(self.sizes) {
            let ok = LabelTuple::from_indices(idx).is_some_and(|t| t.satisfies_constraints());
            if !ok {
                continue;
            }
            let s = self.tuple_score(scores, idx)?;
            if s > best.map_or(F::neg_infinity(), |b| b.1) {
                best = Some((idx, s));
            }
        }
        best.ok_or(Error::InfeasibleDecode)
    }

    pub fn decode_labels(&self, scores: &[F]) -> Result<(LabelTuple, F)> {
        let (idx, score) = self.decode(scores)?;
        let tuple = LabelTuple::from_indices(idx)
            .ok_or_else(|| Error::InvalidInput("CRF is not over the label vocabularies".into()))?;
        Ok((tuple, score))
    }
}

/// Every index tuple (l, s, o, p, v) in lexicographic order.
pub fn tuples(sizes: [usize; 5]) -> impl Iterator<Item = [usize; 5]> {
    let total: usize = sizes.iter().product();
    (0..total).map(move |mut n| {
        let mut idx = [0; 5];
        for k in (0..5).rev() {
            idx[k] = n % sizes[k];
            n /= sizes[k];
        }
        idx
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_crf(rng: &mut ChaCha8Rng, sizes: [usize; 5]) -> (TreeCrf, Vec<f64>) {
        let mut crf = TreeCrf::<f64>::new(sizes);
        for t in &mut crf.tables {
            t.mapv_inplace(|_| rng.gen_range(-2.0..2.0));
        }
        let scores = (0..crf.score_len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        (crf, scores)
    }

    fn brute_force(crf: &TreeCrf, scores: &[f64]) -> (f64, [usize; 5], f64) {
        let all: Vec<([usize; 5], f64)> = tuples(crf.sizes)
            .map(|i| (i, crf.tuple_score(scores, i).unwrap()))
            .collect();
        let log_z = lse(all.iter().map(|a| a.1));
        let best = all.iter().fold(all[0], |b, a| if a.1 > b.1 { *a } else { b });
        (log_z, best.0, best.1)
    }

    #[test]
    fn uniform_partition() {
        let crf = TreeCrf::<f64>::for_labels();
        let z = crf.log_partition(&[0.0; 21]).unwrap();
        assert!((z - 1280f64.ln()).abs() < 1e-12);
        assert!((crf.loss(&[0.0; 21], [0, 1, 2, 3, 4]).unwrap() - 1280f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let sizes = std::array::from_fn(|_| rng.gen_range(1..=6));
            let (crf, scores) = random_crf(&mut rng, sizes);
            let (z, idx, best) = brute_force(&crf, &scores);
            assert!((crf.log_partition(&scores).unwrap() - z).abs() < 1e-8);
            let (d, s) = crf.decode(&scores).unwrap();
            assert_eq!(d, idx);
            assert!((s - best).abs() < 1e-9);
        }
    }

    #[test]
    fn marginals_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (crf, scores) = random_crf(&mut rng, [4, 4, 4, 4, 5]);
        let m = crf.marginals(&scores).unwrap();
        for n in &m.nodes {
            assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for e in &m.edges {
            assert!((e.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_of_one_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (crf, mut scores) = random_crf(&mut rng, [4, 4, 4, 4, 5]);
        let z = crf.log_partition(&scores).unwrap();
        let d = crf.decode(&scores).unwrap().0;
        for s in &mut scores[16..21] {
            *s += 2.5;
        }
        assert!((crf.log_partition(&scores).unwrap() - z - 2.5).abs() < 1e-12);
        assert_eq!(crf.decode(&scores).unwrap().0, d);
    }

    #[test]
    fn independent_slots_without_pairwise_terms() {
        let scores = [
            0.1, 0.5, 0.2, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.4, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 9.0,
        ];
        let (idx, _) = TreeCrf::<f64>::for_labels().decode(&scores).unwrap();
        assert_eq!(idx, [1, 2, 3, 1, 4]);
    }

    #[test]
    fn gold_dominance_drives_loss_to_zero() {
        let gold = [2, 0, 1, 3, 4];
        let crf = TreeCrf::<f64>::for_labels();
        let mut scores = [0.0; 21];
        for (slot, g) in Slot::ALL.iter().zip(gold) {
            scores[slot.offset() + g] = 100.0;
        }
        assert!(crf.loss(&scores, gold).unwrap() < 1e-100);
    }

    #[test]
    fn mask_is_honoured() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (mut crf, mut scores) = random_crf(&mut rng, [4, 4, 4, 4, 5]);
        // Make (locative=None, preposition=toward) very attractive, then forbid it.
        scores[3] += 50.0;
        scores[12] += 50.0;
        let mut mask = CrfMask::allow_all(crf.sizes);
        mask.tables[3][[3, 0]] = false;
        crf.mask = Some(mask);
        let (idx, _) = crf.decode(&scores).unwrap();
        assert!(!(idx[0] == 3 && idx[3] == 0));
        let (z, best, _) = brute_force(&crf, &scores);
        assert_eq!(idx, best);
        assert!((crf.log_partition(&scores).unwrap() - z).abs() < 1e-8);
    }

    #[test]
    fn fully_masked_is_infeasible() {
        let mut crf = TreeCrf::<f64>::for_labels();
        let mut mask = CrfMask::allow_all(crf.sizes);
        mask.tables[0].fill(false);
        crf.mask = Some(mask);
        assert!(matches!(crf.decode(&[0.0; 21]), Err(Error::InfeasibleDecode)));
    }

    #[test]
    fn hard_constraints_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (mut crf, scores) = random_crf(&mut rng, [4, 4, 4, 4, 5]);
            crf.hard_constraints = true;
            let (t, _) = crf.decode_labels(&scores).unwrap();
            assert!(t.satisfies_constraints(), "{t}");
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(TreeCrf::<f64>::for_labels().log_partition(&[0.0; 20]).is_err());
    }
}
