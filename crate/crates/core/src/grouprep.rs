//! Groups, unitary (or projective) representations and Haar sampling.
//!
//! Supported groups are finite groups given by a multiplication table, U(1),
//! SU(2) and finite direct products of these. Lie elements are stored as group
//! parameters (an angle, a unit quaternion) rather than as matrices, so one
//! element evaluates consistently in every representation built on the group.
//!
//! Conventions for Lie evaluators:
//! - U(1): `U(θ) = exp(iθG)` for a Hermitian generator `G`;
//! - SU(2): `U(q) = exp(−i φ·J)` where `φ` is the rotation vector of the
//!   quaternion `q = (cos(|φ|/2), sin(|φ|/2) φ/|φ|)` and `J = (Jx, Jy, Jz)`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::json::JsonMatrix;
use crate::linalg::{c, direct_sum, frob, hermiticity_defect, kron, unitarity_defect, CMatrix, C64, I};

/// Tolerance for the homomorphism check of finite representations at construction.
pub const HOMOMORPHISM_TOL: f64 = 1e-9;
/// Residual above which `verify_representation` rejects a representation.
pub const VERIFY_TOL: f64 = 1e-8;

/// A finite group given by its multiplication table, identity at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Validation("finite group must have at least one element".into()));
        }
        for (r, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "table row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n {
                    return Err(Error::Validation(format!("table row {r}: entry {x} out of range")));
                }
                if seen[x] {
                    return Err(Error::Validation(format!(
                        "table row {r} {row:?} is not a permutation (repeated entry {x})"
                    )));
                }
                seen[x] = true;
            }
        }
        for col in 0..n {
            let mut seen = vec![false; n];
            for (r, row) in table.iter().enumerate() {
                if seen[row[col]] {
                    return Err(Error::Validation(format!(
                        "table column {col} repeats entry {} (row {r})",
                        row[col]
                    )));
                }
                seen[row[col]] = true;
            }
        }
        for j in 0..n {
            if table[0][j] != j || table[j][0] != j {
                return Err(Error::Validation(format!(
                    "index 0 is not the identity (row/column {j})"
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    if table[table[a][b]][d] != table[a][table[b][d]] {
                        return Err(Error::Validation(format!(
                            "table is not associative at ({a}, {b}, {d})"
                        )));
                    }
                }
            }
        }
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == 0).expect("latin square has inverses"))
            .collect();
        Ok(FiniteGroup { table, inverse })
    }

    /// The cyclic group Z_n.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::new(table).expect("cyclic table is valid")
    }

    /// The symmetric group S_n, elements in lexicographic order of permutations.
    pub fn symmetric(n: usize) -> Self {
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        permutations(&mut current, 0, &mut perms);
        perms.sort();
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index(&(0..n).map(|i| a[b[i]]).collect()))
                    .collect()
            })
            .collect();
        FiniteGroup::new(table).expect("symmetric group table is valid")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

/// A concrete group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    Finite(FiniteGroup),
    U1,
    Su2,
    Product(Vec<GroupSpec>),
}

/// A unit quaternion `(w, x, y, z)`, identified with `w·1 − i(xσx + yσy + zσz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion([1.0, 0.0, 0.0, 0.0]);

    pub fn new(q: [f64; 4]) -> Result<Self> {
        let q = Quaternion(q);
        if (q.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "quaternion norm {} differs from 1",
                q.norm()
            )));
        }
        Ok(q)
    }

    pub fn normalized(q: [f64; 4]) -> Self {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        Quaternion(q.map(|x| x / n))
    }

    /// Rotation by `angle` about the unit `axis`.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = (angle / 2.0).sin() / n;
        Quaternion::normalized([(angle / 2.0).cos(), axis[0] * s, axis[1] * s, axis[2] * s])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Hamilton product.
    pub fn mul(&self, other: &Quaternion) -> Quaternion {
        let [w1, x1, y1, z1] = self.0;
        let [w2, x2, y2, z2] = other.0;
        Quaternion([
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ])
    }

    pub fn conj(&self) -> Quaternion {
        let [w, x, y, z] = self.0;
        Quaternion([w, -x, -y, -z])
    }

    /// Rotation vector `φ`, with `|φ| ∈ [0, 2π]`.
    pub fn rotation_vector(&self) -> [f64; 3] {
        let [w, x, y, z] = self.0;
        let s = (x * x + y * y + z * z).sqrt();
        if s < 1e-300 {
            return [0.0; 3];
        }
        let angle = 2.0 * s.atan2(w);
        [angle * x / s, angle * y / s, angle * z / s]
    }
}

/// An element of a [`GroupSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Finite(usize),
    U1(f64),
    Su2(Quaternion),
    Product(Vec<GroupElement>),
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Finite(i) => write!(f, "#{i}"),
            GroupElement::U1(t) => write!(f, "θ={t:.6}"),
            GroupElement::Su2(q) => write!(
                f,
                "q=({:.6},{:.6},{:.6},{:.6})",
                q.0[0], q.0[1], q.0[2], q.0[3]
            ),
            GroupElement::Product(parts) => {
                write!(f, "(")?;
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl GroupSpec {
    pub fn cyclic(n: usize) -> Self {
        GroupSpec::Finite(FiniteGroup::cyclic(n))
    }

    pub fn symmetric(n: usize) -> Self {
        GroupSpec::Finite(FiniteGroup::symmetric(n))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GroupSpec::Finite(_) => "finite",
            GroupSpec::U1 => "u1",
            GroupSpec::Su2 => "su2",
            GroupSpec::Product(_) => "product",
        }
    }

    /// Group order when every component is finite.
    pub fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Finite(g) => Some(g.order()),
            GroupSpec::U1 | GroupSpec::Su2 => None,
            GroupSpec::Product(parts) => parts.iter().map(|p| p.order()).product(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::Finite(_) => GroupElement::Finite(0),
            GroupSpec::U1 => GroupElement::U1(0.0),
            GroupSpec::Su2 => GroupElement::Su2(Quaternion::IDENTITY),
            GroupSpec::Product(parts) => GroupElement::Product(parts.iter().map(|p| p.identity()).collect()),
        }
    }

    pub fn check_element(&self, g: &GroupElement) -> Result<()> {
        let mismatch = || Error::KindMismatch {
            expected: self.kind_name().into(),
            got: g.to_string(),
        };
        match (self, g) {
            (GroupSpec::Finite(f), GroupElement::Finite(i)) => {
                if *i < f.order() {
                    Ok(())
                } else {
                    Err(Error::Validation(format!("element index {i} out of range 0..{}", f.order())))
                }
            }
            (GroupSpec::U1, GroupElement::U1(t)) if t.is_finite() => Ok(()),
            (GroupSpec::Su2, GroupElement::Su2(q)) => {
                if (q.norm() - 1.0).abs() <= 1e-12 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!("quaternion norm {} differs from 1", q.norm())))
                }
            }
            (GroupSpec::Product(parts), GroupElement::Product(els)) if parts.len() == els.len() => {
                parts.iter().zip(els).try_for_each(|(p, e)| p.check_element(e))
            }
            _ => Err(mismatch()),
        }
    }

    /// Group law `g·h`.
    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check_element(g)?;
        self.check_element(h)?;
        Ok(self.compose_unchecked(g, h))
    }

    fn compose_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (self, g, h) {
            (GroupSpec::Finite(f), GroupElement::Finite(a), GroupElement::Finite(b)) => {
                GroupElement::Finite(f.mul(*a, *b))
            }
            (GroupSpec::U1, GroupElement::U1(a), GroupElement::U1(b)) => {
                GroupElement::U1((a + b).rem_euclid(2.0 * PI))
            }
            (GroupSpec::Su2, GroupElement::Su2(a), GroupElement::Su2(b)) => {
                let q = a.mul(b);
                GroupElement::Su2(Quaternion::normalized(q.0))
            }
            (GroupSpec::Product(parts), GroupElement::Product(x), GroupElement::Product(y)) => GroupElement::Product(
                parts
                    .iter()
                    .zip(x.iter().zip(y))
                    .map(|(p, (a, b))| p.compose_unchecked(a, b))
                    .collect(),
            ),
            _ => unreachable!("elements checked against the group"),
        }
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check_element(g)?;
        Ok(match (self, g) {
            (GroupSpec::Finite(f), GroupElement::Finite(a)) => GroupElement::Finite(f.inv(*a)),
            (GroupSpec::U1, GroupElement::U1(t)) => GroupElement::U1((-t).rem_euclid(2.0 * PI)),
            (GroupSpec::Su2, GroupElement::Su2(q)) => GroupElement::Su2(q.conj()),
            (GroupSpec::Product(parts), GroupElement::Product(els)) => GroupElement::Product(
                parts
                    .iter()
                    .zip(els)
                    .map(|(p, e)| p.inverse(e))
                    .collect::<Result<_>>()?,
            ),
            _ => unreachable!(),
        })
    }

    /// All elements, for finite groups and products of finite groups.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match self {
            GroupSpec::Finite(f) => Some((0..f.order()).map(GroupElement::Finite).collect()),
            GroupSpec::U1 | GroupSpec::Su2 => None,
            GroupSpec::Product(parts) => {
                let mut acc: Vec<Vec<GroupElement>> = vec![Vec::new()];
                for p in parts {
                    let els = p.elements()?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            els.iter().map(move |e| {
                                let mut v = prefix.clone();
                                v.push(e.clone());
                                v
                            })
                        })
                        .collect();
                }
                Some(acc.into_iter().map(GroupElement::Product).collect())
            }
        }
    }

    /// A finite constraint set whose commutant equals the commutant of the group:
    /// every element for finite groups, and the one-parameter subgroups at
    /// parameters 1 and √2 for Lie kinds.
    pub fn generating_elements(&self) -> Vec<GroupElement> {
        match self {
            GroupSpec::Finite(f) => (0..f.order()).map(GroupElement::Finite).collect(),
            GroupSpec::U1 => vec![GroupElement::U1(1.0), GroupElement::U1(SQRT_2)],
            GroupSpec::Su2 => {
                let mut out = Vec::new();
                for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
                    for t in [1.0, SQRT_2] {
                        out.push(GroupElement::Su2(Quaternion::from_axis_angle(axis, t)));
                    }
                }
                out
            }
            GroupSpec::Product(parts) => {
                let ids: Vec<GroupElement> = parts.iter().map(|p| p.identity()).collect();
                let mut out = Vec::new();
                for (k, p) in parts.iter().enumerate() {
                    for e in p.generating_elements() {
                        let mut v = ids.clone();
                        v[k] = e;
                        out.push(GroupElement::Product(v));
                    }
                }
                out
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum GroupDoc {
    Finite { order: usize, table: Vec<Vec<usize>> },
    U1 {},
    Su2 {},
    Product { components: Vec<GroupDoc> },
}

impl GroupDoc {
    fn into_spec(self) -> Result<GroupSpec> {
        Ok(match self {
            GroupDoc::Finite { order, table } => {
                if table.len() != order {
                    return Err(Error::parse(
                        "table",
                        format!("{} rows for declared order {order}", table.len()),
                    ));
                }
                GroupSpec::Finite(FiniteGroup::new(table)?)
            }
            GroupDoc::U1 {} => GroupSpec::U1,
            GroupDoc::Su2 {} => GroupSpec::Su2,
            GroupDoc::Product { components } => {
                if components.is_empty() {
                    return Err(Error::parse("components", "product needs at least one component"));
                }
                GroupSpec::Product(components.into_iter().map(|c| c.into_spec()).collect::<Result<_>>()?)
            }
        })
    }
}

fn serde_field_error(e: &serde_json::Error) -> Error {
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "document".to_string());
    Error::parse(field, msg)
}

/// Parses and validates a group-description JSON document.
pub fn load_group_spec(document: &str) -> Result<GroupSpec> {
    let doc: GroupDoc = serde_json::from_str(document).map_err(|e| serde_field_error(&e))?;
    doc.into_spec()
}

/// How the components of a composite representation are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    Tensor,
    DirectSum,
}

type CustomFn = Arc<dyn Fn(&GroupElement) -> CMatrix + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Matrices(Arc<Vec<CMatrix>>),
    U1(Arc<CMatrix>),
    Su2(Arc<[CMatrix; 3]>),
    Trivial,
    /// Product group: component `k` acts through `parts[k]`.
    Product { parts: Vec<Representation>, composition: Composition },
    /// Same group, both factors evaluated at the same element.
    Pair { left: Box<Representation>, right: Box<Representation>, composition: Composition },
    Conjugate(Box<Representation>),
    Custom(CustomFn),
}

/// A unitary (or projective) representation of a [`GroupSpec`].
#[derive(Clone)]
pub struct Representation {
    group: GroupSpec,
    dim: usize,
    projective: bool,
    eval: Evaluator,
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Representation")
            .field("group", &self.group.kind_name())
            .field("dim", &self.dim)
            .field("projective", &self.projective)
            .finish()
    }
}

fn spin_matrices(two_j: usize) -> [CMatrix; 3] {
    let j = two_j as f64 / 2.0;
    let n = two_j + 1;
    let mut jp = CMatrix::zeros(n, n);
    let m_of = |k: usize| j - k as f64;
    for k in 1..n {
        // J+ |j, m⟩ with m = m_of(k) maps to index k-1
        let m = m_of(k);
        jp[(k - 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).scale(0.5);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    let jz = CMatrix::from_fn(n, n, |a, b| if a == b { c(m_of(a), 0.0) } else { c(0.0, 0.0) });
    [jx, jy, jz]
}

impl Representation {
    /// Finite representation from one matrix per element, validated eagerly.
    pub fn from_matrices(group: GroupSpec, matrices: Vec<CMatrix>, projective: bool) -> Result<Self> {
        let rep = Self::from_matrices_unchecked(group, matrices, projective)?;
        rep.check_finite_invariants()?;
        Ok(rep)
    }

    /// As [`Representation::from_matrices`] but only checks shapes.
    pub fn from_matrices_unchecked(group: GroupSpec, matrices: Vec<CMatrix>, projective: bool) -> Result<Self> {
        let order = match &group {
            GroupSpec::Finite(f) => f.order(),
            other => {
                return Err(Error::KindMismatch {
                    expected: "finite".into(),
                    got: other.kind_name().into(),
                })
            }
        };
        if matrices.len() != order {
            return Err(Error::parse("matrices", format!("{} matrices for a group of order {order}", matrices.len())));
        }
        let dim = matrices.first().map_or(0, |m| m.nrows());
        if dim == 0 {
            return Err(Error::parse("dimension", "representation dimension must be positive"));
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::parse(format!("matrices[{k}]"), format!("expected {dim}x{dim}")));
            }
        }
        Ok(Representation {
            group,
            dim,
            projective,
            eval: Evaluator::Matrices(Arc::new(matrices)),
        })
    }

    fn check_finite_invariants(&self) -> Result<()> {
        let Evaluator::Matrices(mats) = &self.eval else { return Ok(()) };
        let GroupSpec::Finite(f) = &self.group else { return Ok(()) };
        for (k, m) in mats.iter().enumerate() {
            let defect = unitarity_defect(m);
            if defect > 1e-10 * self.dim as f64 {
                return Err(Error::Validation(format!("matrix {k} is not unitary (defect {defect:.3e})")));
            }
        }
        for a in 0..f.order() {
            for b in 0..f.order() {
                let r = pair_residual(&(&mats[a] * &mats[b]), &mats[f.mul(a, b)], self.projective);
                if r > HOMOMORPHISM_TOL {
                    return Err(Error::RepresentationInvalid {
                        residual: r,
                        left: format!("#{a}"),
                        right: format!("#{b}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// U(1) representation `θ ↦ exp(iθG)`.
    pub fn u1(generator: CMatrix) -> Result<Self> {
        check_generator(&generator, 0)?;
        Ok(Representation {
            group: GroupSpec::U1,
            dim: generator.nrows(),
            projective: false,
            eval: Evaluator::U1(Arc::new(generator)),
        })
    }

    /// SU(2) representation `q ↦ exp(−i φ(q)·J)`.
    pub fn su2(generators: [CMatrix; 3]) -> Result<Self> {
        let dim = generators[0].nrows();
        for (k, g) in generators.iter().enumerate() {
            if g.nrows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.nrows() });
            }
            check_generator(g, k)?;
        }
        Ok(Representation {
            group: GroupSpec::Su2,
            dim,
            projective: false,
            eval: Evaluator::Su2(Arc::new(generators)),
        })
    }

    /// Spin-j irreducible representation of SU(2), `two_j = 2j`.
    pub fn spin(two_j: usize) -> Self {
        Representation::su2(spin_matrices(two_j)).expect("spin matrices are Hermitian")
    }

    /// Number representation `diag(e^{inθ})`, `n = 0..levels`, of U(1).
    pub fn u1_number(levels: usize) -> Self {
        let g = CMatrix::from_fn(levels, levels, |a, b| if a == b { c(a as f64, 0.0) } else { c(0.0, 0.0) });
        Representation::u1(g).expect("diagonal generator")
    }

    /// Left-regular representation of a finite group.
    pub fn regular(group: &GroupSpec) -> Result<Self> {
        let GroupSpec::Finite(f) = group else {
            return Err(Error::KindMismatch { expected: "finite".into(), got: group.kind_name().into() });
        };
        let n = f.order();
        let mats = (0..n)
            .map(|g| {
                let mut m = CMatrix::zeros(n, n);
                for h in 0..n {
                    m[(f.mul(g, h), h)] = c(1.0, 0.0);
                }
                m
            })
            .collect();
        Representation::from_matrices(group.clone(), mats, false)
    }

    pub fn trivial(group: GroupSpec, dim: usize) -> Self {
        Representation { group, dim, projective: false, eval: Evaluator::Trivial }
    }

    /// Representation of a product group from one representation per component.
    pub fn product(parts: Vec<Representation>, composition: Composition) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Validation("product representation needs components".into()));
        }
        let group = GroupSpec::Product(parts.iter().map(|p| p.group.clone()).collect());
        let dim = match composition {
            Composition::Tensor => parts.iter().map(|p| p.dim).product(),
            Composition::DirectSum => parts.iter().map(|p| p.dim).sum(),
        };
        let projective = parts.iter().any(|p| p.projective);
        Ok(Representation { group, dim, projective, eval: Evaluator::Product { parts, composition } })
    }

    /// Arbitrary evaluator, without any validation. Intended for fault injection.
    pub fn from_fn_unchecked(
        group: GroupSpec,
        dim: usize,
        projective: bool,
        f: impl Fn(&GroupElement) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        Representation { group, dim, projective, eval: Evaluator::Custom(Arc::new(f)) }
    }

    fn combine(&self, other: &Representation, composition: Composition) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::Validation("cannot combine representations of different groups".into()));
        }
        let dim = match composition {
            Composition::Tensor => self.dim * other.dim,
            Composition::DirectSum => self.dim + other.dim,
        };
        let projective = self.projective || other.projective;
        let join = |a: &CMatrix, b: &CMatrix| match composition {
            Composition::Tensor => kron(a, b),
            Composition::DirectSum => direct_sum(a, b),
        };
        // generators combine as G⊗1 + 1⊗H or G⊕H
        let join_gen = |a: &CMatrix, b: &CMatrix| match composition {
            Composition::Tensor => {
                kron(a, &CMatrix::identity(b.nrows(), b.nrows())) + kron(&CMatrix::identity(a.nrows(), a.nrows()), b)
            }
            Composition::DirectSum => direct_sum(a, b),
        };
        let eval = match (&self.eval, &other.eval) {
            (Evaluator::Matrices(a), Evaluator::Matrices(b)) => {
                Evaluator::Matrices(Arc::new(a.iter().zip(b.iter()).map(|(x, y)| join(x, y)).collect()))
            }
            (Evaluator::Matrices(a), Evaluator::Trivial) => {
                let id = CMatrix::identity(other.dim, other.dim);
                Evaluator::Matrices(Arc::new(a.iter().map(|x| join(x, &id)).collect()))
            }
            (Evaluator::Trivial, Evaluator::Matrices(b)) => {
                let id = CMatrix::identity(self.dim, self.dim);
                Evaluator::Matrices(Arc::new(b.iter().map(|y| join(&id, y)).collect()))
            }
            (Evaluator::Trivial, Evaluator::Trivial) => Evaluator::Trivial,
            _ => match (self.lie_generators(), other.lie_generators()) {
                (Some(a), Some(b)) => {
                    let gens: Vec<CMatrix> = a.iter().zip(b.iter()).map(|(x, y)| join_gen(x, y)).collect();
                    match &self.group {
                        GroupSpec::U1 => Evaluator::U1(Arc::new(gens[0].clone())),
                        GroupSpec::Su2 => Evaluator::Su2(Arc::new([gens[0].clone(), gens[1].clone(), gens[2].clone()])),
                        _ => unreachable!("only Lie kinds carry generators"),
                    }
                }
                _ => Evaluator::Pair {
                    left: Box::new(self.clone()),
                    right: Box::new(other.clone()),
                    composition,
                },
            },
        };
        Ok(Representation { group: self.group.clone(), dim, projective, eval })
    }

    /// `g ↦ U_g ⊗ V_g`.
    pub fn tensor(&self, other: &Representation) -> Result<Self> {
        self.combine(other, Composition::Tensor)
    }

    /// `g ↦ U_g ⊕ V_g`.
    pub fn direct_sum(&self, other: &Representation) -> Result<Self> {
        self.combine(other, Composition::DirectSum)
    }

    /// `g ↦ U_g ⊗ 1_R`, an external reference of dimension `d_r`.
    pub fn with_reference(&self, d_r: usize) -> Result<Self> {
        self.tensor(&Representation::trivial(self.group.clone(), d_r))
    }

    /// Entrywise complex conjugate `g ↦ U_g*`.
    pub fn conjugate(&self) -> Self {
        let eval = match &self.eval {
            Evaluator::Matrices(m) => Evaluator::Matrices(Arc::new(m.iter().map(|x| x.conjugate()).collect())),
            Evaluator::U1(g) => Evaluator::U1(Arc::new(-g.conjugate())),
            Evaluator::Su2(j) => Evaluator::Su2(Arc::new([-j[0].conjugate(), -j[1].conjugate(), -j[2].conjugate()])),
            Evaluator::Trivial => Evaluator::Trivial,
            _ => Evaluator::Conjugate(Box::new(self.clone())),
        };
        Representation { group: self.group.clone(), dim: self.dim, projective: self.projective, eval }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// Hermitian generators for U(1) (one) and SU(2) (three) representations.
    pub fn lie_generators(&self) -> Option<Vec<CMatrix>> {
        let zero = || CMatrix::zeros(self.dim, self.dim);
        match (&self.eval, &self.group) {
            (Evaluator::U1(g), _) => Some(vec![(**g).clone()]),
            (Evaluator::Su2(j), _) => Some(j.to_vec()),
            (Evaluator::Trivial, GroupSpec::U1) => Some(vec![zero()]),
            (Evaluator::Trivial, GroupSpec::Su2) => Some(vec![zero(), zero(), zero()]),
            _ => None,
        }
    }

    /// Evaluates `U_g`.
    pub fn evaluate(&self, g: &GroupElement) -> Result<CMatrix> {
        self.group.check_element(g)?;
        Ok(self.evaluate_unchecked(g))
    }

    fn evaluate_unchecked(&self, g: &GroupElement) -> CMatrix {
        match (&self.eval, g) {
            (Evaluator::Matrices(m), GroupElement::Finite(i)) => m[*i].clone(),
            (Evaluator::U1(gen), GroupElement::U1(t)) => (&**gen * (I * *t)).exp(),
            (Evaluator::Su2(j), GroupElement::Su2(q)) => {
                let phi = q.rotation_vector();
                let h = &j[0] * c(phi[0], 0.0) + &j[1] * c(phi[1], 0.0) + &j[2] * c(phi[2], 0.0);
                (h * (-I)).exp()
            }
            (Evaluator::Trivial, _) => CMatrix::identity(self.dim, self.dim),
            (Evaluator::Product { parts, composition }, GroupElement::Product(els)) => {
                let mats: Vec<CMatrix> = parts.iter().zip(els).map(|(p, e)| p.evaluate_unchecked(e)).collect();
                let mut acc = mats[0].clone();
                for m in &mats[1..] {
                    acc = match composition {
                        Composition::Tensor => kron(&acc, m),
                        Composition::DirectSum => direct_sum(&acc, m),
                    };
                }
                acc
            }
            (Evaluator::Pair { left, right, composition }, _) => {
                let a = left.evaluate_unchecked(g);
                let b = right.evaluate_unchecked(g);
                match composition {
                    Composition::Tensor => kron(&a, &b),
                    Composition::DirectSum => direct_sum(&a, &b),
                }
            }
            (Evaluator::Conjugate(inner), _) => inner.evaluate_unchecked(g).conjugate(),
            (Evaluator::Custom(f), _) => f(g),
            _ => unreachable!("element kind checked against the group"),
        }
    }

    /// Matrices of the constraint set used for commutant computations.
    pub fn constraint_matrices(&self) -> Vec<CMatrix> {
        self.group
            .generating_elements()
            .iter()
            .map(|g| self.evaluate_unchecked(g))
            .collect()
    }
}

fn check_generator(g: &CMatrix, k: usize) -> Result<()> {
    if g.nrows() != g.ncols() || g.nrows() == 0 {
        return Err(Error::parse(format!("generators[{k}]"), "generator must be square and non-empty"));
    }
    let d = hermiticity_defect(g);
    if d > 1e-12 {
        return Err(Error::Validation(format!("generator {k} is not Hermitian (defect {d:.3e})")));
    }
    Ok(())
}

/// `‖AB − ωC‖_F / √dim`, minimized over unimodular `ω` when projective.
fn pair_residual(ab: &CMatrix, target: &CMatrix, projective: bool) -> f64 {
    let dim = ab.nrows() as f64;
    if projective {
        let tr: C64 = (target.adjoint() * ab).trace();
        let omega = if tr.norm() > 0.0 { tr / tr.norm() } else { c(1.0, 0.0) };
        frob(&(ab - target * omega)) / dim.sqrt()
    } else {
        frob(&(ab - target)) / dim.sqrt()
    }
}

/// Seeded sampler for the normalized Haar measure.
#[derive(Debug, Clone)]
pub struct HaarSampler {
    spec: GroupSpec,
    seed: u64,
    counter: u64,
    rng: ChaCha20Rng,
}

impl HaarSampler {
    pub fn new(spec: GroupSpec, seed: u64) -> Self {
        HaarSampler { spec, seed, counter: 0, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of elements drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn sample(&mut self) -> GroupElement {
        self.counter += 1;
        let spec = self.spec.clone();
        draw(&spec, &mut self.rng)
    }

    pub fn sample_n(&mut self, count: usize) -> Vec<GroupElement> {
        (0..count).map(|_| self.sample()).collect()
    }
}

fn draw(spec: &GroupSpec, rng: &mut ChaCha20Rng) -> GroupElement {
    match spec {
        GroupSpec::Finite(f) => GroupElement::Finite(rng.random_range(0..f.order())),
        GroupSpec::U1 => GroupElement::U1(rng.random_range(0.0..2.0 * PI)),
        GroupSpec::Su2 => loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                break GroupElement::Su2(Quaternion::normalized(q));
            }
        },
        GroupSpec::Product(parts) => GroupElement::Product(parts.iter().map(|p| draw(p, rng)).collect()),
    }
}

/// Draws `count` Haar-distributed elements.
pub fn haar_sample(sampler: &mut HaarSampler, count: usize) -> Vec<GroupElement> {
    sampler.sample_n(count.max(1))
}

/// `U_g` for `g` in a representation.
pub fn evaluate_unitary(rep: &Representation, g: &GroupElement) -> Result<CMatrix> {
    rep.evaluate(g)
}

/// Outcome of a homomorphism check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerificationReport {
    pub max_residual: f64,
    pub worst_pair: Option<(String, String)>,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    pub max_unitarity_defect: f64,
}

/// Checks `U(g)U(h) ≈ ω U(gh)`: exhaustively for finite groups, on 100 Haar pairs otherwise.
pub fn verify_representation(rep: &Representation, sampler: &mut HaarSampler) -> Result<VerificationReport> {
    let group = rep.group().clone();
    let pairs: Vec<(GroupElement, GroupElement)> = match group.elements() {
        Some(els) => els
            .iter()
            .flat_map(|a| els.iter().map(move |b| (a.clone(), b.clone())))
            .collect(),
        None => (0..100).map(|_| (sampler.sample(), sampler.sample())).collect(),
    };
    let exhaustive = group.is_finite();
    let mut report = VerificationReport {
        max_residual: 0.0,
        worst_pair: None,
        pairs_checked: pairs.len(),
        exhaustive,
        max_unitarity_defect: 0.0,
    };
    for (g, h) in &pairs {
        let ug = rep.evaluate(g)?;
        let uh = rep.evaluate(h)?;
        let ugh = rep.evaluate(&group.compose(g, h)?)?;
        report.max_unitarity_defect = report.max_unitarity_defect.max(unitarity_defect(&ug));
        let r = pair_residual(&(&ug * &uh), &ugh, rep.is_projective());
        if r > report.max_residual || report.worst_pair.is_none() {
            report.max_residual = r;
            report.worst_pair = Some((g.to_string(), h.to_string()));
        }
    }
    let unit_tol = 1e-10 * rep.dim() as f64;
    if report.max_residual > VERIFY_TOL {
        let (left, right) = report.worst_pair.clone().unwrap_or_default();
        return Err(Error::RepresentationInvalid { residual: report.max_residual, left, right });
    }
    if report.max_unitarity_defect > unit_tol {
        return Err(Error::Validation(format!(
            "evaluator is not unitary (defect {:.3e})",
            report.max_unitarity_defect
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Representation documents

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepDoc {
    dimension: Option<usize>,
    matrices: Option<Vec<JsonMatrix>>,
    generators: Option<Vec<JsonMatrix>>,
    composition: Option<Composition>,
    components: Option<Vec<RepDoc>>,
    #[serde(default)]
    projective: bool,
    #[serde(default)]
    conjugate: bool,
    reference_dim: Option<usize>,
    #[serde(default)]
    regular: bool,
    spin: Option<f64>,
    number_levels: Option<usize>,
}

impl RepDoc {
    fn build(self, group: &GroupSpec, checked: bool) -> Result<Representation> {
        let mut rep = if let Some(components) = self.components {
            let composition = self
                .composition
                .ok_or_else(|| Error::parse("composition", "required alongside components"))?;
            match group {
                GroupSpec::Product(parts) => {
                    if parts.len() != components.len() {
                        return Err(Error::parse(
                            "components",
                            format!("{} components for a product of {}", components.len(), parts.len()),
                        ));
                    }
                    let reps = components
                        .into_iter()
                        .zip(parts)
                        .map(|(doc, g)| doc.build(g, checked))
                        .collect::<Result<Vec<_>>>()?;
                    Representation::product(reps, composition)?
                }
                _ => {
                    let mut reps = components.into_iter().map(|doc| doc.build(group, checked));
                    let mut acc = reps
                        .next()
                        .ok_or_else(|| Error::parse("components", "at least one component required"))??;
                    for r in reps {
                        let r = r?;
                        acc = match composition {
                            Composition::Tensor => acc.tensor(&r)?,
                            Composition::DirectSum => acc.direct_sum(&r)?,
                        };
                    }
                    acc
                }
            }
        } else if self.regular {
            Representation::regular(group)?
        } else if let Some(j) = self.spin {
            if *group != GroupSpec::Su2 {
                return Err(Error::parse("spin", "spin representations need an su2 group"));
            }
            let two_j = (2.0 * j).round();
            if (2.0 * j - two_j).abs() > 1e-12 || two_j < 0.0 {
                return Err(Error::parse("spin", "spin must be a non-negative half-integer"));
            }
            Representation::spin(two_j as usize)
        } else if let Some(levels) = self.number_levels {
            if *group != GroupSpec::U1 {
                return Err(Error::parse("number_levels", "number representations need a u1 group"));
            }
            Representation::u1_number(levels)
        } else if let Some(mats) = self.matrices {
            let mats = mats
                .iter()
                .enumerate()
                .map(|(k, m)| m.to_square(self.dimension, &format!("matrices[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            if checked {
                Representation::from_matrices(group.clone(), mats, self.projective)?
            } else {
                Representation::from_matrices_unchecked(group.clone(), mats, self.projective)?
            }
        } else if let Some(gens) = self.generators {
            let gens = gens
                .iter()
                .enumerate()
                .map(|(k, m)| m.to_square(self.dimension, &format!("generators[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            match group {
                GroupSpec::U1 => {
                    if gens.len() != 1 {
                        return Err(Error::parse("generators", "u1 needs exactly one generator"));
                    }
                    Representation::u1(gens[0].clone())?
                }
                GroupSpec::Su2 => {
                    if gens.len() != 3 {
                        return Err(Error::parse("generators", "su2 needs exactly three generators"));
                    }
                    Representation::su2([gens[0].clone(), gens[1].clone(), gens[2].clone()])?
                }
                other => {
                    return Err(Error::parse(
                        "generators",
                        format!("generators are only valid for Lie kinds, not {}", other.kind_name()),
                    ))
                }
            }
        } else {
            return Err(Error::parse(
                "matrices",
                "representation needs one of matrices, generators, components, regular, spin, number_levels",
            ));
        };
        if let Some(d) = self.dimension {
            if self.reference_dim.is_none() && !self.conjugate && d != rep.dim() {
                return Err(Error::parse("dimension", format!("declared {d}, built {}", rep.dim())));
            }
        }
        if self.conjugate {
            rep = rep.conjugate();
        }
        if let Some(k) = self.reference_dim {
            if k == 0 {
                return Err(Error::parse("reference_dim", "must be positive"));
            }
            rep = rep.with_reference(k)?;
        }
        Ok(rep)
    }
}

/// Parses and validates a representation document against its group.
pub fn load_representation(document: &str, group: &GroupSpec) -> Result<Representation> {
    let doc: RepDoc = serde_json::from_str(document).map_err(|e| serde_field_error(&e))?;
    doc.build(group, true)
}

/// Parses a representation without the eager homomorphism check, for `verify`.
pub fn load_representation_unchecked(document: &str, group: &GroupSpec) -> Result<Representation> {
    let doc: RepDoc = serde_json::from_str(document).map_err(|e| serde_field_error(&e))?;
    doc.build(group, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z3_doc() -> &'static str {
        r#"{"kind":"finite","order":3,"table":[[0,1,2],[1,2,0],[2,0,1]]}"#
    }

    #[test]
    fn z3_document_loads() {
        let g = load_group_spec(z3_doc()).unwrap();
        assert_eq!(g.order(), Some(3));
    }

    #[test]
    fn repeated_entry_is_rejected_with_row() {
        let doc = r#"{"kind":"finite","order":3,"table":[[0,1,2],[0,1,1],[2,0,1]]}"#;
        let err = load_group_spec(doc).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation(_)));
        assert!(msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn missing_field_names_it() {
        let err = load_group_spec(r#"{"kind":"finite","order":3}"#).unwrap_err();
        match err {
            Error::Parse { field, .. } => assert_eq!(field, "table"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn product_document_has_two_components() {
        let doc = r#"{"kind":"product","components":[{"kind":"u1"},{"kind":"finite","order":2,"table":[[0,1],[1,0]]}]}"#;
        match load_group_spec(doc).unwrap() {
            GroupSpec::Product(parts) => {
                assert_eq!(parts.len(), 2);
                assert_eq!(parts[0], GroupSpec::U1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shift_rep_sends_e0_to_e1() {
        let g = GroupSpec::cyclic(3);
        let rep = Representation::regular(&g).unwrap();
        let u = rep.evaluate(&GroupElement::Finite(1)).unwrap();
        assert_eq!(u[(1, 0)], c(1.0, 0.0));
        assert_eq!(u[(2, 1)], c(1.0, 0.0));
        assert_eq!(u[(0, 2)], c(1.0, 0.0));
    }

    #[test]
    fn spin_half_identity() {
        let rep = Representation::spin(1);
        let u = rep.evaluate(&GroupElement::Su2(Quaternion::IDENTITY)).unwrap();
        assert!(frob(&(u - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn spin_half_matches_quaternion_matrix() {
        let q = Quaternion::normalized([0.3, -0.5, 0.7, 0.2]);
        let u = Representation::spin(1).evaluate(&GroupElement::Su2(q)).unwrap();
        let [w, x, y, z] = q.0;
        let expect = CMatrix::from_row_slice(2, 2, &[c(w, -z), c(-y, -x), c(y, -x), c(w, z)]);
        assert!(frob(&(u - expect)) < 1e-12);
    }

    #[test]
    fn number_rep_at_pi() {
        let u = Representation::u1_number(3).evaluate(&GroupElement::U1(PI)).unwrap();
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]));
        assert!(frob(&(u - expect)) < 1e-12);
    }

    #[test]
    fn kind_mismatch_is_a_type_error() {
        let err = Representation::spin(1).evaluate(&GroupElement::U1(0.1)).unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }));
    }

    #[test]
    fn z3_uniform_frequencies() {
        let mut s = HaarSampler::new(GroupSpec::cyclic(3), 7);
        let n = 30_000;
        let mut counts = [0usize; 3];
        for g in s.sample_n(n) {
            if let GroupElement::Finite(i) = g {
                counts[i] += 1;
            }
        }
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for k in counts {
            assert!((k as f64 - n as f64 / 3.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn su2_samples_concentrate_at_zero_mean() {
        let mut s = HaarSampler::new(GroupSpec::Su2, 11);
        let mut mean = [0.0; 4];
        let n = 10_000;
        for g in s.sample_n(n) {
            let GroupElement::Su2(q) = g else { unreachable!() };
            assert!((q.norm() - 1.0).abs() < 1e-12);
            for k in 0..4 {
                mean[k] += q.0[k] / n as f64;
            }
        }
        assert!(mean.iter().map(|x| x * x).sum::<f64>().sqrt() <= 0.05);
    }

    #[test]
    fn u1_sampling_is_deterministic() {
        let a = HaarSampler::new(GroupSpec::U1, 99).sample();
        let b = HaarSampler::new(GroupSpec::U1, 99).sample();
        assert_eq!(a, b);
    }

    #[test]
    fn verify_passes_for_shift_and_spin_pair() {
        let g = GroupSpec::cyclic(3);
        let rep = Representation::regular(&g).unwrap();
        let r = verify_representation(&rep, &mut HaarSampler::new(g, 1)).unwrap();
        assert!(r.max_residual < 1e-12);
        assert!(r.exhaustive);

        let pair = Representation::spin(1).tensor(&Representation::spin(1)).unwrap();
        let r = verify_representation(&pair, &mut HaarSampler::new(GroupSpec::Su2, 2)).unwrap();
        assert!(r.max_residual < 1e-10);
        assert_eq!(r.pairs_checked, 100);
    }

    #[test]
    fn scaled_matrix_fails_verification() {
        let g = GroupSpec::cyclic(3);
        let rep = Representation::regular(&g).unwrap();
        let mut mats: Vec<CMatrix> = (0..3).map(|k| rep.evaluate(&GroupElement::Finite(k)).unwrap()).collect();
        mats[1] *= c(1.01, 0.0);
        assert!(Representation::from_matrices(g.clone(), mats.clone(), false).is_err());
        let bad = Representation::from_matrices_unchecked(g.clone(), mats, false).unwrap();
        match verify_representation(&bad, &mut HaarSampler::new(g, 1)) {
            Err(Error::RepresentationInvalid { residual, .. }) => {
                assert!(residual > 5e-3 && residual < 5e-2, "{residual}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projective_phase_is_tolerated() {
        // Pauli group of Z2 x Z2: X, Z anticommute
        let g = GroupSpec::Product(vec![GroupSpec::cyclic(2), GroupSpec::cyclic(2)]);
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let z = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let rep = Representation::from_fn_unchecked(g.clone(), 2, true, move |el| {
            let GroupElement::Product(p) = el else { unreachable!() };
            let (GroupElement::Finite(a), GroupElement::Finite(b)) = (&p[0], &p[1]) else { unreachable!() };
            let mut m = CMatrix::identity(2, 2);
            if *a == 1 {
                m = &m * &x;
            }
            if *b == 1 {
                m = &m * &z;
            }
            m
        });
        let r = verify_representation(&rep, &mut HaarSampler::new(g, 0)).unwrap();
        assert!(r.max_residual < 1e-12);
    }

    #[test]
    fn s3_table_is_a_group() {
        let g = FiniteGroup::symmetric(3);
        assert_eq!(g.order(), 6);
        let rep = Representation::regular(&GroupSpec::Finite(g)).unwrap();
        assert_eq!(rep.dim(), 6);
    }

    #[test]
    fn product_rep_evaluates_componentwise() {
        let rep = Representation::product(
            vec![Representation::u1_number(2), Representation::regular(&GroupSpec::cyclic(2)).unwrap()],
            Composition::Tensor,
        )
        .unwrap();
        let g = GroupElement::Product(vec![GroupElement::U1(PI), GroupElement::Finite(1)]);
        let u = rep.evaluate(&g).unwrap();
        assert_eq!(u.nrows(), 4);
        let r = verify_representation(&rep, &mut HaarSampler::new(rep.group().clone(), 5)).unwrap();
        assert!(r.max_residual < 1e-10);
    }

    #[test]
    fn conjugate_lie_rep_is_a_rep() {
        let rep = Representation::spin(2).conjugate();
        let r = verify_representation(&rep, &mut HaarSampler::new(GroupSpec::Su2, 3)).unwrap();
        assert!(r.max_residual < 1e-10);
        let q = GroupElement::Su2(Quaternion::normalized([0.1, 0.2, 0.3, 0.4]));
        let diff = rep.evaluate(&q).unwrap() - Representation::spin(2).evaluate(&q).unwrap().conjugate();
        assert!(frob(&diff) < 1e-12);
    }
}
