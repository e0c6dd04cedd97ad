//! The explicit representation layer for the quantum isomeric superalgebra
//! U_q(q_n).
//!
//! Everything here is a concrete matrix over ℤ[q,q⁻¹] acting on tensor words
//! in the natural supermodule `V` and its dual:
//!
//! - the Θ-matrix on V⊗V and its components Θ_{ij} (the images ρ(u_{ij}) of
//!   the generators on V);
//! - antipode images ρ(S(u_{ij})) obtained by triangular inversion of the
//!   L-matrix, and the S²-images;
//! - structure maps: the braiding candidate T = flip∘Θ, evaluation and
//!   coevaluation, their right-handed cousins, and the odd map J;
//! - generator actions on arbitrary tensor words, built by one
//!   comultiplication step per factor;
//! - the y-elements and the central elements they produce.

use crate::scalars::{LaurentScalar, ScalarMode};
use crate::superlin::{
    e_matrix, flip_words, j_matrix, IndexData, LinError, SpaceWord, SuperMatrix,
};
use std::collections::BTreeMap;

const MODE: ScalarMode = ScalarMode::QLaurent;

/// All (i,j) with i ≤ j in the total order −n < … < −1 < 1 < … < n.
pub fn ordered_pairs(n: i64) -> Vec<(i64, i64)> {
    let data = IndexData::new(n);
    let idx: Vec<i64> = data.indices_ordered().collect();
    let mut out = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a..] {
            out.push((i, j));
        }
    }
    out
}

/// The Θ-matrix, its inverse, and its components.
#[derive(Debug, Clone)]
pub struct ThetaData {
    /// Index size.
    pub n: i64,
    /// Θ as a matrix on V⊗V (Koszul-signed realization of Σ Θ_{ij}⊗E_{ij}).
    pub theta: SuperMatrix,
    /// Θ⁻¹, equal to Θ with q ↦ q⁻¹.
    pub theta_inv: SuperMatrix,
    components: BTreeMap<(i64, i64), SuperMatrix>,
    components_inv: BTreeMap<(i64, i64), SuperMatrix>,
}

/// Build Θ from its defining double sum:
/// Θ = Σ_{i,j} q^{φ(i,j)} E_{ii}⊗E_{jj}
///   + z Σ_{i<j} (−1)^{p(i)} (E_{ji}+E_{−j,−i})⊗E_{ij}.
pub fn build_theta(n: i64) -> ThetaData {
    let data = IndexData::new(n);
    let mut components: BTreeMap<(i64, i64), SuperMatrix> = BTreeMap::new();
    let mut components_inv: BTreeMap<(i64, i64), SuperMatrix> = BTreeMap::new();
    for (i, j) in ordered_pairs(n) {
        let (c, cinv) = if i == j {
            // Θ_{jj} = Σ_a q^{δ_{a,j}−δ_{a,−j}} (E_{aa}+E_{−a,−a}).
            let mut m = SuperMatrix::zero(SpaceWord::v(n), SpaceWord::v(n), MODE);
            let mut minv = SuperMatrix::zero(SpaceWord::v(n), SpaceWord::v(n), MODE);
            for a in 1..=n {
                let exp = i64::from(a == j) - i64::from(a == -j);
                for k in [a, -a] {
                    let pos = data.basis_pos(k);
                    m.add_entry(pos, pos, LaurentScalar::q_pow(exp));
                    minv.add_entry(pos, pos, LaurentScalar::q_pow(-exp));
                }
            }
            m.recompute_parity();
            minv.recompute_parity();
            (m, minv)
        } else {
            // Θ_{ij} = z (−1)^{p(i)} (E_{ji}+E_{−j,−i}) for i < j.
            let sgn = data.sgn(i);
            let base = e_matrix(n, j, i, MODE).add(&e_matrix(n, -j, -i, MODE)).unwrap();
            let c = base.scale(&LaurentScalar::z_in_q()).scale_int(sgn);
            (c.clone(), c.scale_int(-1))
        };
        components.insert((i, j), c);
        components_inv.insert((i, j), cinv);
    }
    let theta = assemble_l_matrix(&SpaceWord::v(n), &components, n);
    let theta_inv = assemble_l_matrix(&SpaceWord::v(n), &components_inv, n);
    ThetaData { n, theta, theta_inv, components, components_inv }
}

impl ThetaData {
    /// The component Θ_{ij} = ρ(u_{ij}) on V, for i ≤ j.
    pub fn component(&self, i: i64, j: i64) -> &SuperMatrix {
        &self.components[&(i, j)]
    }

    /// The component of Θ⁻¹ at (i,j), i ≤ j.
    pub fn component_inv(&self, i: i64, j: i64) -> &SuperMatrix {
        &self.components_inv[&(i, j)]
    }
}

/// Assemble Σ_{i≤j} ρ_M(x_{ij}) ⊗ E_{ij} as a matrix on M⊗V, with the Koszul
/// sign of the tensor of maps.
pub fn assemble_l_matrix(
    module: &SpaceWord,
    action: &BTreeMap<(i64, i64), SuperMatrix>,
    n: i64,
) -> SuperMatrix {
    let mut acc =
        SuperMatrix::zero(module.tensor(&SpaceWord::v(n)), module.tensor(&SpaceWord::v(n)), MODE);
    for ((i, j), m) in action {
        let e = e_matrix(n, *i, *j, MODE);
        acc = acc.add(&m.koszul_tensor(&e).unwrap()).unwrap();
    }
    acc
}

/// Extract the blocks of an operator Op = Σ_{i,j} f_{ij} ⊗ E_{ij} on M⊗V,
/// undoing the Koszul sign: returns the map (i,j) ↦ f_{ij} on M.
pub fn extract_l_blocks(op: &SuperMatrix, module: &SpaceWord, n: i64) -> BTreeMap<(i64, i64), SuperMatrix> {
    let data = IndexData::new(n);
    let dv = 2 * n as usize;
    let mut out: BTreeMap<(i64, i64), SuperMatrix> = BTreeMap::new();
    for (&(row, col), s) in op.iter() {
        let (rm, rv) = (row / dv, row % dv);
        let (cm, cv) = (col / dv, col % dv);
        let i = data.index_at(rv);
        let j = data.index_at(cv);
        // (f⊗E_{ij}) has entry sign (−1)^{p(i,j)·parity(cm)}.
        let pe = (data.parity(i) + data.parity(j)) % 2;
        let sign = if pe == 1 && module.parity_of(cm) == 1 { -1 } else { 1 };
        out.entry((i, j))
            .or_insert_with(|| SuperMatrix::zero(module.clone(), module.clone(), MODE))
            .add_entry(rm, cm, s.scale_int(sign));
    }
    for m in out.values_mut() {
        m.recompute_parity();
    }
    out
}

/// The matrices ρ(S(u_{ij})) on V, i ≤ j, by triangular back-substitution of
/// Σ_{i≤k≤j} S(u_{ik}) u_{kj} = δ_{ij}.
pub fn antipode_matrices(theta: &ThetaData) -> BTreeMap<(i64, i64), SuperMatrix> {
    let n = theta.n;
    let data = IndexData::new(n);
    let idx: Vec<i64> = data.indices_ordered().collect();
    let mut a: BTreeMap<(i64, i64), SuperMatrix> = BTreeMap::new();
    for (pos_i, &i) in idx.iter().enumerate() {
        // Diagonal: S(u_{ii}) = u_{ii}⁻¹ = u_{−i,−i} acts as Θ_{−i,−i}.
        let (lo, hi) = if data.lt(-i, i) { (-i, i) } else { (i, -i) };
        let _ = (lo, hi);
        a.insert((i, i), theta_diag_inverse(theta, i));
        for &j in &idx[pos_i + 1..] {
            // A_{ij} = −(Σ_{i≤k<j} A_{ik} Θ_{kj}) Θ_{jj}⁻¹.
            let mut sum = SuperMatrix::zero(SpaceWord::v(n), SpaceWord::v(n), MODE);
            for &k in &idx {
                if !data.lt(k, j) || (k != i && !data.lt(i, k)) {
                    continue;
                }
                sum = sum.add(&a[&(i, k)].compose(theta.component(k, j)).unwrap()).unwrap();
            }
            let val = sum.compose(&theta_diag_inverse(theta, j)).unwrap().scale_int(-1);
            a.insert((i, j), val);
        }
    }
    a
}

/// Θ_{jj}⁻¹ = Θ_{−j,−j}.
fn theta_diag_inverse(theta: &ThetaData, j: i64) -> SuperMatrix {
    theta.component(-j, -j).clone()
}

/// The matrices ρ(S²(u_{ij})) on V, solving Σ_{i≤k≤j} S(u_{kj}) S²(u_{ik}) = δ_{ij}.
pub fn s_squared_matrices(theta: &ThetaData) -> BTreeMap<(i64, i64), SuperMatrix> {
    let n = theta.n;
    let data = IndexData::new(n);
    let s = antipode_matrices(theta);
    let idx: Vec<i64> = data.indices_ordered().collect();
    let mut b: BTreeMap<(i64, i64), SuperMatrix> = BTreeMap::new();
    for (pos_j, &j) in idx.iter().enumerate() {
        // k = j term: A_{jj} B_{jj} = id ⇒ B_{jj} = A_{jj}⁻¹ = Θ_{jj}.
        b.insert((j, j), theta.component(j, j).clone());
        let _ = pos_j;
    }
    // Fill in increasing distance so B_{ik} for i ≤ k < j is available.
    for gap in 1..idx.len() {
        for a_pos in 0..idx.len() - gap {
            let i = idx[a_pos];
            let j = idx[a_pos + gap];
            // Σ_{i≤k≤j} A_{kj} B_{ik} = 0; the k=j term isolates B_{ij}.
            let mut sum = SuperMatrix::zero(SpaceWord::v(n), SpaceWord::v(n), MODE);
            for &k in &idx[a_pos..a_pos + gap] {
                sum = sum.add(&s[&(k, j)].compose(&b[&(i, k)]).unwrap()).unwrap();
            }
            let val = theta.component(j, j).compose(&sum).unwrap().scale_int(-1);
            b.insert((i, j), val);
        }
    }
    b
}

/// The structure maps of the diagram incarnation on V and V*.
#[derive(Debug, Clone)]
pub struct StructureMaps {
    /// Index size.
    pub n: i64,
    /// T = flip ∘ Θ on V⊗V.
    pub t: SuperMatrix,
    /// T⁻¹ = Θ⁻¹ ∘ flip.
    pub t_inv: SuperMatrix,
    /// Evaluation V*⊗V → k, v*_i⊗v_j ↦ δ_{ij}.
    pub ev: SuperMatrix,
    /// Coevaluation k → V⊗V*, 1 ↦ Σ v_i⊗v*_i.
    pub coev: SuperMatrix,
    /// Right cap V⊗V* → k, v_i⊗v*_j ↦ δ_{ij} (−1)^{p(i)} q^{2|i|−2n−1}.
    pub right_cap: SuperMatrix,
    /// Right cup k → V*⊗V, 1 ↦ Σ (−1)^{p(i)} q^{2n−2|i|+1} v*_i⊗v_i.
    pub right_cup: SuperMatrix,
    /// J on V: v_i ↦ (−1)^{p(i)} v_{−i}.
    pub j_v: SuperMatrix,
    /// The induced odd map on V* (conjugate of J by evaluation/coevaluation);
    /// acts as v*_i ↦ −v*_{−i} and squares to +1.
    pub j_vdual: SuperMatrix,
}

/// Build all structure maps for size `n`.
pub fn structure_maps(n: i64) -> StructureMaps {
    let data = IndexData::new(n);
    let theta = build_theta(n);
    let v = SpaceWord::v(n);
    let vd = SpaceWord::v_dual(n);
    let unit = SpaceWord::unit(n);
    let flip = flip_words(&v, &v, MODE);
    let t = flip.compose(&theta.theta).unwrap();
    let t_inv = theta.theta_inv.compose(&flip).unwrap();

    let mut ev = SuperMatrix::zero(vd.tensor(&v), unit.clone(), MODE);
    for i in data.indices() {
        let col = vd.tensor(&v).index_of(&[i, i]);
        ev.add_entry(0, col, LaurentScalar::one(MODE));
    }
    ev.recompute_parity();

    let mut coev = SuperMatrix::zero(unit.clone(), v.tensor(&vd), MODE);
    for i in data.indices() {
        let row = v.tensor(&vd).index_of(&[i, i]);
        coev.add_entry(row, 0, LaurentScalar::one(MODE));
    }
    coev.recompute_parity();

    let mut right_cap = SuperMatrix::zero(v.tensor(&vd), unit.clone(), MODE);
    for i in data.indices() {
        let col = v.tensor(&vd).index_of(&[i, i]);
        let s = LaurentScalar::q_pow(2 * i.abs() - 2 * n - 1).scale_int(data.sgn(i));
        right_cap.add_entry(0, col, s);
    }
    right_cap.recompute_parity();

    let mut right_cup = SuperMatrix::zero(unit, vd.tensor(&v), MODE);
    for i in data.indices() {
        let row = vd.tensor(&v).index_of(&[i, i]);
        let s = LaurentScalar::q_pow(2 * n - 2 * i.abs() + 1).scale_int(data.sgn(i));
        right_cup.add_entry(row, 0, s);
    }
    right_cup.recompute_parity();

    let j_v = j_matrix(n, MODE);
    // j_vdual = (ev⊗1) ∘ (1⊗J⊗1) ∘ (1⊗coev) on V*.
    let id_vd = SuperMatrix::identity(vd.clone(), MODE);
    let step1 = id_vd.koszul_tensor(&coev).unwrap();
    let step2 = id_vd.koszul_tensor(&j_v.koszul_tensor(&id_vd).unwrap()).unwrap();
    let step3 = ev.koszul_tensor(&id_vd).unwrap();
    let j_vdual = step3.compose(&step2.compose(&step1).unwrap()).unwrap();

    StructureMaps { n, t, t_inv, ev, coev, right_cap, right_cup, j_v, j_vdual }
}

/// The action of every generator u_{ij} (i ≤ j) on a tensor word, built by
/// one comultiplication step per factor: Δ(u_{ij}) = Σ_{i≤k≤j} u_{ik}⊗u_{kj}
/// (sign-free on that index range).
#[derive(Debug, Clone)]
pub struct GeneratorAction {
    /// Index size.
    pub n: i64,
    /// The module the generators act on.
    pub module: SpaceWord,
    /// ρ_M(u_{ij}) for every i ≤ j.
    pub matrices: BTreeMap<(i64, i64), SuperMatrix>,
}

/// Compute the generator action on `module`.
pub fn generator_action(n: i64, module: &SpaceWord) -> GeneratorAction {
    let theta = build_theta(n);
    let antipode = antipode_matrices(&theta);
    let matrices = action_on_word(n, module, &theta, &antipode);
    GeneratorAction { n, module: module.clone(), matrices }
}

fn action_on_word(
    n: i64,
    module: &SpaceWord,
    theta: &ThetaData,
    antipode: &BTreeMap<(i64, i64), SuperMatrix>,
) -> BTreeMap<(i64, i64), SuperMatrix> {
    let data = IndexData::new(n);
    if module.is_empty() {
        // ε(u_{ij}) = δ_{ij} on the unit object.
        let unit = SpaceWord::unit(n);
        return ordered_pairs(n)
            .into_iter()
            .map(|(i, j)| {
                let m = if i == j {
                    SuperMatrix::identity(unit.clone(), MODE)
                } else {
                    SuperMatrix::zero(unit.clone(), unit.clone(), MODE)
                };
                ((i, j), m)
            })
            .collect();
    }
    let rest = SpaceWord { n, factors: module.factors[1..].to_vec() };
    let first_action: BTreeMap<(i64, i64), SuperMatrix> = match module.factors[0] {
        crate::superlin::Factor::V => ordered_pairs(n)
            .into_iter()
            .map(|(i, j)| ((i, j), theta.component(i, j).clone()))
            .collect(),
        crate::superlin::Factor::Vdual => ordered_pairs(n)
            .into_iter()
            .map(|(i, j)| ((i, j), dual_action(n, i, j, antipode)))
            .collect(),
    };
    if rest.is_empty() {
        return first_action;
    }
    let rest_action = action_on_word(n, &rest, theta, antipode);
    let mut out = BTreeMap::new();
    for (i, j) in ordered_pairs(n) {
        let mut acc = SuperMatrix::zero(module.clone(), module.clone(), MODE);
        for k in data.indices_ordered() {
            if (k != i && !data.lt(i, k)) || (k != j && !data.lt(k, j)) {
                continue;
            }
            let term = first_action[&(i, k)].koszul_tensor(&rest_action[&(k, j)]).unwrap();
            acc = acc.add(&term).unwrap();
        }
        out.insert((i, j), acc);
    }
    out
}

/// The signed supertranspose carrying an action on V to the dual action on
/// V*: if `a` is the matrix of an element of parity `pe` acting on V after
/// the antipode has been applied, the dual action is
/// v*_k ↦ Σ_l (−1)^{pe·p(k)} a_{kl} v*_l.
fn dual_transpose(n: i64, pe: u8, a: &SuperMatrix) -> SuperMatrix {
    let data = IndexData::new(n);
    let vd = SpaceWord::v_dual(n);
    let mut out = SuperMatrix::zero(vd.clone(), vd, MODE);
    for (&(row, col), s) in a.iter() {
        let k = data.index_at(row);
        let sign = if pe == 1 && data.parity(k) == 1 { -1 } else { 1 };
        out.add_entry(col, row, s.scale_int(sign));
    }
    out.recompute_parity();
    out
}

/// The dual action of u_{ij} on V*: (x·f)(v) = (−1)^{x̄ f̄} f(S(x) v), giving
/// u_{ij}·v*_k = Σ_l (−1)^{p(i,j) p(k)} (ρS(u_{ij}))_{kl} v*_l.
fn dual_action(n: i64, i: i64, j: i64, antipode: &BTreeMap<(i64, i64), SuperMatrix>) -> SuperMatrix {
    let data = IndexData::new(n);
    let pe = (data.parity(i) + data.parity(j)) % 2;
    dual_transpose(n, pe, &antipode[&(i, j)])
}

/// The antipode action ρ_M(S(u_{ij})) on a tensor-word module, via
/// Δ(S(u_{ij})) = Σ_{i≤k≤j} S(u_{kj}) ⊗ S(u_{ik}).  On a dual factor the
/// antipode composes with the dual action, giving the signed supertranspose
/// of ρ_V(S²(u_{ij})).
pub fn antipode_action_on_word(
    n: i64,
    module: &SpaceWord,
    theta: &ThetaData,
    antipode: &BTreeMap<(i64, i64), SuperMatrix>,
) -> BTreeMap<(i64, i64), SuperMatrix> {
    let data = IndexData::new(n);
    if module.is_empty() {
        let unit = SpaceWord::unit(n);
        return ordered_pairs(n)
            .into_iter()
            .map(|(i, j)| {
                let m = if i == j {
                    SuperMatrix::identity(unit.clone(), MODE)
                } else {
                    SuperMatrix::zero(unit.clone(), unit.clone(), MODE)
                };
                ((i, j), m)
            })
            .collect();
    }
    let first_action: BTreeMap<(i64, i64), SuperMatrix> = match module.factors[0] {
        crate::superlin::Factor::V => antipode.clone(),
        crate::superlin::Factor::Vdual => {
            let s2 = s_squared_matrices(theta);
            ordered_pairs(n)
                .into_iter()
                .map(|(i, j)| {
                    let pe = (data.parity(i) + data.parity(j)) % 2;
                    ((i, j), dual_transpose(n, pe, &s2[&(i, j)]))
                })
                .collect()
        }
    };
    if module.len() == 1 {
        return first_action;
    }
    let rest = SpaceWord { n, factors: module.factors[1..].to_vec() };
    let rest_action = antipode_action_on_word(n, &rest, theta, antipode);
    let mut out = BTreeMap::new();
    for (i, j) in ordered_pairs(n) {
        let mut acc = SuperMatrix::zero(module.clone(), module.clone(), MODE);
        for k in data.indices_ordered() {
            if (k != i && !data.lt(i, k)) || (k != j && !data.lt(k, j)) {
                continue;
            }
            let term = first_action[&(k, j)].koszul_tensor(&rest_action[&(i, k)]).unwrap();
            acc = acc.add(&term).unwrap();
        }
        out.insert((i, j), acc);
    }
    out
}

/// ρ_V(S⁻¹(u_{ij})) = q^{2|i|−2|j|} ρ_V(S(u_{ij})).
pub fn inverse_antipode_matrices(theta: &ThetaData) -> BTreeMap<(i64, i64), SuperMatrix> {
    let antipode = antipode_matrices(theta);
    antipode
        .into_iter()
        .map(|((i, j), a)| {
            let c = LaurentScalar::q_pow(2 * i.abs() - 2 * j.abs());
            ((i, j), a.scale(&c))
        })
        .collect()
}

/// The operator on M⊗V whose L-blocks are the y-elements:
/// L⁻¹ ∘ flip ∘ (J⊗1) ∘ flip ∘ L ∘ (1⊗J).
pub fn y_operator(n: i64, module: &SpaceWord) -> SuperMatrix {
    let theta = build_theta(n);
    let antipode = antipode_matrices(&theta);
    let action = action_on_word(n, module, &theta, &antipode);
    let s_action = antipode_action_on_word(n, module, &theta, &antipode);
    let l = assemble_l_matrix(module, &action, n);
    let l_inv = assemble_l_matrix(module, &s_action, n);
    let v = SpaceWord::v(n);
    let j = j_matrix(n, MODE);
    let id_m = SuperMatrix::identity(module.clone(), MODE);
    let flip_mv = flip_words(module, &v, MODE);
    let flip_vm = flip_words(&v, module, MODE);
    let one_j = id_m.koszul_tensor(&j).unwrap();
    let j_one = j.koszul_tensor(&id_m).unwrap();
    l_inv
        .compose(&flip_vm)
        .unwrap()
        .compose(&j_one)
        .unwrap()
        .compose(&flip_mv)
        .unwrap()
        .compose(&l)
        .unwrap()
        .compose(&one_j)
        .unwrap()
}

/// ρ_M(y^{(m)}_{ij}) for all i,j, extracted from the m-th power of the
/// y-operator on M⊗V.
pub fn y_matrices(n: i64, m: u32, module: &SpaceWord) -> BTreeMap<(i64, i64), SuperMatrix> {
    assert!(m >= 1);
    let op = y_operator(n, module);
    let mut power = op.clone();
    for _ in 1..m {
        power = power.compose(&op).unwrap();
    }
    extract_l_blocks(&power, module, n)
}

/// ρ_M(y_{ij}) on V by its defining sum
/// y_{ij} = −Σ_{k ≥ max(i,j)} (−1)^{p(i,k)p(j,k)} S(u_{ik}) u_{−k,−j},
/// used as an independent cross-check of the block extraction.
pub fn y_matrix_by_sum(n: i64, i: i64, j: i64) -> SuperMatrix {
    let data = IndexData::new(n);
    let theta = build_theta(n);
    let antipode = antipode_matrices(&theta);
    let v = SpaceWord::v(n);
    let mut acc = SuperMatrix::zero(v.clone(), v, MODE);
    for k in data.indices_ordered() {
        let ge = |a: i64| k == a || data.lt(a, k);
        if !(ge(i) && ge(j)) {
            continue;
        }
        let p_ik = (data.parity(i) + data.parity(k)) % 2;
        let p_jk = (data.parity(j) + data.parity(k)) % 2;
        let sign = if p_ik == 1 && p_jk == 1 { -1 } else { 1 };
        let term = antipode[&(i, k)].compose(theta.component(-k, -j)).unwrap();
        acc = acc.add(&term.scale_int(sign)).unwrap();
    }
    acc.scale_int(-1)
}

/// The central element Σ_i (−1)^{p(i)} q^{2|i|−2n−1} y^{(m)}_{ii} acting on
/// the module `module`.
pub fn central_element_on(n: i64, m: u32, module: &SpaceWord) -> SuperMatrix {
    let data = IndexData::new(n);
    let y = y_matrices(n, m, module);
    let mut acc = SuperMatrix::zero(module.clone(), module.clone(), MODE);
    for i in data.indices() {
        if let Some(yii) = y.get(&(i, i)) {
            let c = LaurentScalar::q_pow(2 * i.abs() - 2 * n - 1).scale_int(data.sgn(i));
            acc = acc.add(&yii.scale(&c)).unwrap();
        }
    }
    acc
}

/// The central element on V^⊗r.
pub fn central_element(n: i64, m: u32, r: usize) -> SuperMatrix {
    central_element_on(n, m, &SpaceWord::v_pow(n, r))
}

/// Check that `f` intertwines two generator actions:
/// f ∘ ρ_dom(u_{ij}) = (−1)^{f̄·p(i,j)} ρ_cod(u_{ij}) ∘ f for every i ≤ j.
pub fn is_module_map(
    f: &SuperMatrix,
    dom: &GeneratorAction,
    cod: &GeneratorAction,
) -> Result<bool, LinError> {
    let data = IndexData::new(dom.n);
    let f_parity = match f.declared_parity {
        crate::superlin::Parity::Even => 0,
        crate::superlin::Parity::Odd => 1,
        crate::superlin::Parity::Mixed => return Ok(false),
    };
    for (i, j) in ordered_pairs(dom.n) {
        let pe = (data.parity(i) + data.parity(j)) % 2;
        let lhs = f.compose(&dom.matrices[&(i, j)])?;
        let sign = if f_parity == 1 && pe == 1 { -1 } else { 1 };
        let rhs = cod.matrices[&(i, j)].compose(f)?.scale_int(sign);
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superlin::Parity;

    #[test]
    fn theta_basics() {
        for n in 1..=2i64 {
            let th = build_theta(n);
            let id = SuperMatrix::identity(SpaceWord::v_pow(n, 2), MODE);
            assert_eq!(th.theta.compose(&th.theta_inv).unwrap(), id);
            // Θ_{ii}Θ_{−i,−i} = 1.
            let data = IndexData::new(n);
            for i in data.indices() {
                let prod = th.component(i, i).compose(th.component(-i, -i)).unwrap();
                assert_eq!(prod, SuperMatrix::identity(SpaceWord::v(n), MODE));
            }
            // q = 1 specialization: Θ becomes the identity.
            use num_bigint::BigInt;
            use num_rational::BigRational;
            use num_traits::Zero;
            let one = BigRational::from_integer(BigInt::from(1));
            for (&(r, c), s) in th.theta.iter() {
                let v = s.specialize(&one).unwrap();
                if r == c {
                    assert_eq!(v, one);
                } else {
                    assert!(v.is_zero(), "off-diagonal entry {r},{c} = {s}");
                }
            }
        }
        // n=1: Θ(v₁⊗v₁) has coefficient q on v₁⊗v₁.
        let th = build_theta(1);
        let w = SpaceWord::v_pow(1, 2);
        let col = w.index_of(&[1, 1]);
        assert_eq!(th.theta.get(col, col), LaurentScalar::q_pow(1));
    }

    #[test]
    fn yang_baxter() {
        for n in 1..=2i64 {
            let th = build_theta(n);
            let id = SuperMatrix::identity(SpaceWord::v(n), MODE);
            let t12 = th.theta.koszul_tensor(&id).unwrap();
            let t23 = id.koszul_tensor(&th.theta).unwrap();
            // Θ¹³ = Σ Θ_{ij} ⊗ 1 ⊗ E_{ij}: build from components.
            let mut t13 = SuperMatrix::zero(SpaceWord::v_pow(n, 3), SpaceWord::v_pow(n, 3), MODE);
            for (i, j) in ordered_pairs(n) {
                let e = e_matrix(n, i, j, MODE);
                let term = th
                    .component(i, j)
                    .koszul_tensor(&id)
                    .unwrap()
                    .koszul_tensor(&e)
                    .unwrap();
                t13 = t13.add(&term).unwrap();
            }
            let lhs = t12.compose(&t13).unwrap().compose(&t23).unwrap();
            let rhs = t23.compose(&t13).unwrap().compose(&t12).unwrap();
            assert_eq!(lhs, rhs, "Yang-Baxter fails at n={n}");
        }
    }

    #[test]
    fn l_relation() {
        // L¹²L¹³Θ²³ = Θ²³L¹³L¹² with u_{ij} ↦ Θ_{ij} — on V⊗V⊗V this is
        // exactly the Yang–Baxter instance restricted to i ≤ j blocks; here
        // we check it verbatim by assembling the triangular L.
        for n in 1..=2i64 {
            let th = build_theta(n);
            let id = SuperMatrix::identity(SpaceWord::v(n), MODE);
            let v = SpaceWord::v(n);
            // L¹² = Σ Θ_{ij} ⊗ E_{ij} ⊗ 1, L¹³ = Σ Θ_{ij} ⊗ 1 ⊗ E_{ij}.
            let mut l12 = SuperMatrix::zero(SpaceWord::v_pow(n, 3), SpaceWord::v_pow(n, 3), MODE);
            let mut l13 = SuperMatrix::zero(SpaceWord::v_pow(n, 3), SpaceWord::v_pow(n, 3), MODE);
            for (i, j) in ordered_pairs(n) {
                let e = e_matrix(n, i, j, MODE);
                l12 = l12
                    .add(&th.component(i, j).koszul_tensor(&e).unwrap().koszul_tensor(&id).unwrap())
                    .unwrap();
                l13 = l13
                    .add(&th.component(i, j).koszul_tensor(&id).unwrap().koszul_tensor(&e).unwrap())
                    .unwrap();
            }
            let t23 = id.koszul_tensor(&th.theta).unwrap();
            let lhs = l12.compose(&l13).unwrap().compose(&t23).unwrap();
            let rhs = t23.compose(&l13).unwrap().compose(&l12).unwrap();
            assert_eq!(lhs, rhs, "L-relation fails at n={n}");
            let _ = v;
        }
    }

    #[test]
    fn antipode_matches_theta_inverse_components() {
        for n in 1..=2i64 {
            let th = build_theta(n);
            let a = antipode_matrices(&th);
            for (i, j) in ordered_pairs(n) {
                assert_eq!(&a[&(i, j)], th.component_inv(i, j), "antipode block ({i},{j}) n={n}");
            }
        }
    }

    #[test]
    fn s_squared_eigenvalues() {
        for n in 1..=2i64 {
            let th = build_theta(n);
            let b = s_squared_matrices(&th);
            for (i, j) in ordered_pairs(n) {
                let expected = th.component(i, j).scale(&LaurentScalar::q_pow(2 * j.abs() - 2 * i.abs()));
                assert_eq!(b[&(i, j)], expected, "S² block ({i},{j}) n={n}");
            }
        }
        // n=1: S²(u_{−1,1}) = u_{−1,1}.
        let th = build_theta(1);
        let b = s_squared_matrices(&th);
        assert_eq!(b[&(-1, 1)], th.component(-1, 1).clone());
    }

    #[test]
    fn t_closed_form_and_inverse() {
        for n in 1..=2i64 {
            let data = IndexData::new(n);
            let sm = structure_maps(n);
            let w = SpaceWord::v_pow(n, 2);
            // T(v_i⊗v_j) = (−1)^{p(i)p(j)} q^{φ(i,j)} v_j⊗v_i
            //            + z δ_{i<j} v_i⊗v_j + z δ_{i+j>0} (−1)^{p(j)} v_{−i}⊗v_{−j}.
            let mut expected = SuperMatrix::zero(w.clone(), w.clone(), MODE);
            for i in data.indices() {
                for j in data.indices() {
                    let col = w.index_of(&[i, j]);
                    let koszul = if data.parity(i) == 1 && data.parity(j) == 1 { -1 } else { 1 };
                    expected.add_entry(
                        w.index_of(&[j, i]),
                        col,
                        LaurentScalar::q_pow(data.phi(i, j)).scale_int(koszul),
                    );
                    if data.lt(i, j) {
                        expected.add_entry(w.index_of(&[i, j]), col, LaurentScalar::z_in_q());
                    }
                    if i + j > 0 {
                        let s = LaurentScalar::z_in_q().scale_int(data.sgn(j));
                        expected.add_entry(w.index_of(&[-i, -j]), col, s);
                    }
                }
            }
            expected.recompute_parity();
            assert_eq!(sm.t, expected, "T closed form fails at n={n}");
            // T T⁻¹ = 1 and T − T⁻¹ = z.
            let id = SuperMatrix::identity(w.clone(), MODE);
            assert_eq!(sm.t.compose(&sm.t_inv).unwrap(), id);
            assert_eq!(sm.t_inv.compose(&sm.t).unwrap(), id);
            assert_eq!(sm.t.sub(&sm.t_inv).unwrap(), id.scale(&LaurentScalar::z_in_q()));
        }
    }

    #[test]
    fn right_cap_bubble_vanishes() {
        for n in 1..=2i64 {
            let sm = structure_maps(n);
            // capR ∘ cupL = Σ_i (−1)^{p(i)} q^{2|i|−2n−1} = 0.
            let bubble = sm.right_cap.compose(&sm.coev).unwrap();
            assert!(bubble.is_zero(), "right bubble nonzero at n={n}");
            // capL ∘ cupR = 0 likewise.
            let bubble_l = sm.ev.compose(&sm.right_cup).unwrap();
            assert!(bubble_l.is_zero(), "left bubble nonzero at n={n}");
        }
    }

    #[test]
    fn j_vdual_squares_to_plus_one() {
        for n in 1..=2i64 {
            let sm = structure_maps(n);
            assert_eq!(sm.j_vdual.declared_parity, Parity::Odd);
            let sq = sm.j_vdual.compose(&sm.j_vdual).unwrap();
            assert_eq!(sq, SuperMatrix::identity(SpaceWord::v_dual(n), MODE));
        }
    }

    #[test]
    fn t_is_a_module_map_and_ev_coev_are_too() {
        for n in 1..=2i64 {
            let sm = structure_maps(n);
            let act_v2 = generator_action(n, &SpaceWord::v_pow(n, 2));
            assert!(is_module_map(&sm.t, &act_v2, &act_v2).unwrap(), "T not equivariant n={n}");
            let vd_v = SpaceWord { n, factors: vec![crate::superlin::Factor::Vdual, crate::superlin::Factor::V] };
            let act_dv = generator_action(n, &vd_v);
            let act_unit = generator_action(n, &SpaceWord::unit(n));
            assert!(is_module_map(&sm.ev, &act_dv, &act_unit).unwrap(), "ev not equivariant n={n}");
            let v_vd = SpaceWord { n, factors: vec![crate::superlin::Factor::V, crate::superlin::Factor::Vdual] };
            let act_vd = generator_action(n, &v_vd);
            assert!(is_module_map(&sm.coev, &act_unit, &act_vd).unwrap(), "coev not equivariant n={n}");
            assert!(is_module_map(&sm.right_cap, &act_vd, &act_unit).unwrap(), "right cap not equivariant n={n}");
            assert!(is_module_map(&sm.right_cup, &act_unit, &act_dv).unwrap(), "right cup not equivariant n={n}");
        }
    }

    #[test]
    fn diagonal_generators_commute_and_act_by_q_power() {
        // u₁₁u₂₂⋯u_nn acts on V^⊗r as q^r; Θ_{ii}Θ_{kk} commute.
        for (n, r) in [(1i64, 2usize), (2, 2)] {
            let act = generator_action(n, &SpaceWord::v_pow(n, r));
            let data = IndexData::new(n);
            let mut prod = SuperMatrix::identity(SpaceWord::v_pow(n, r), MODE);
            for a in 1..=n {
                prod = prod.compose(&act.matrices[&(a, a)]).unwrap();
            }
            let expected = SuperMatrix::identity(SpaceWord::v_pow(n, r), MODE)
                .scale(&LaurentScalar::q_pow(r as i64));
            assert_eq!(prod, expected);
            for i in data.indices() {
                for k in data.indices() {
                    let a = act.matrices[&(i, i)].clone();
                    let b = act.matrices[&(k, k)].clone();
                    assert_eq!(a.compose(&b).unwrap(), b.compose(&a).unwrap());
                }
            }
        }
    }

    #[test]
    fn y_operator_blocks_match_sum_formula() {
        for n in 1..=2i64 {
            let v = SpaceWord::v(n);
            let blocks = y_matrices(n, 1, &v);
            let data = IndexData::new(n);
            for i in data.indices() {
                for j in data.indices() {
                    let by_sum = y_matrix_by_sum(n, i, j);
                    match blocks.get(&(i, j)) {
                        Some(b) => assert_eq!(b, &by_sum, "y block ({i},{j}) n={n}"),
                        None => assert!(by_sum.is_zero(), "missing nonzero y block ({i},{j}) n={n}"),
                    }
                }
            }
        }
    }

    #[test]
    fn central_element_commutes() {
        for (n, m, r) in [(1i64, 1u32, 1usize), (1, 2, 2), (2, 1, 2)] {
            let c = central_element(n, m, r);
            assert_eq!(c.declared_parity, Parity::Even);
            let act = generator_action(n, &SpaceWord::v_pow(n, r));
            for (pair, rho) in &act.matrices {
                let comm = c.super_commutator(rho);
                match comm {
                    Ok(x) => assert!(x.is_zero(), "central element fails to commute with u_{pair:?} (n={n}, m={m}, r={r})"),
                    Err(_) => {
                        // ρ may be mixed-parity zero; treat genuine zero as pass.
                        assert!(rho.is_zero());
                    }
                }
            }
        }
    }
}
