//! Cohomology of a triangulated closed oriented surface with coefficients in
//! a rank-one unitary local system, and cup products.
//!
//! Cochains live on simplices with increasing vertices. A local system is a
//! weight `w_ij` per edge `i < j` transporting values from `j` to `i`, with
//! `w_ji = w_ij⁻¹` and flatness `w_ij w_jk = w_ik` on every triangle. The
//! differentials are
//!
//! * `(δh)_ij = w_ij h_j - h_i`,
//! * `(δa)_ijk = a_ij + w_ij a_jk - a_ik`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{Matrix, Rref};
use std::collections::{HashMap, VecDeque};

/// Oriented closed triangulated surface with a fixed vertex order `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceComplex {
    n_vertices: usize,
    /// Triangles with their orientation.
    triangles: Vec<[usize; 3]>,
    /// Triangles with increasing vertices, aligned with `triangles`.
    sorted: Vec<[usize; 3]>,
    /// `+1` when the increasing order agrees with the orientation.
    signs: Vec<i64>,
    /// Edges `[i, j]` with `i < j`, in lexicographic order.
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<(usize, usize), usize>,
}

fn perm_sign(t: [usize; 3]) -> i64 {
    let mut inv = 0;
    for a in 0..3 {
        for b in (a + 1)..3 {
            if t[a] > t[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

impl SurfaceComplex {
    /// Complex from oriented triangles; checks that it is a closed, connected,
    /// consistently oriented surface.
    pub fn new(n_vertices: usize, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for t in &triangles {
            if t.iter().any(|&v| v >= n_vertices) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidComplex(format!("bad triangle {t:?}")));
            }
            let mut s = *t;
            s.sort_unstable();
            if !seen.insert(s) {
                return Err(Error::InvalidComplex(format!("repeated triangle {t:?}")));
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &triangles {
            for e in 0..3 {
                *directed.entry((t[e], t[(e + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut edge_set: Vec<[usize; 2]> = Vec::new();
        for (&(a, b), &c) in &directed {
            if c != 1 || directed.get(&(b, a)) != Some(&1) {
                return Err(Error::InvalidComplex(format!(
                    "edge ({a},{b}) does not border two oppositely oriented triangles"
                )));
            }
            if a < b {
                edge_set.push([a, b]);
            }
        }
        edge_set.sort_unstable();
        let edge_index = edge_set.iter().enumerate().map(|(i, e)| ((e[0], e[1]), i)).collect();
        let sorted: Vec<[usize; 3]> = triangles
            .iter()
            .map(|t| {
                let mut s = *t;
                s.sort_unstable();
                s
            })
            .collect();
        let signs = triangles.iter().map(|t| perm_sign(*t)).collect();
        let c = SurfaceComplex { n_vertices, triangles, sorted, signs, edges: edge_set, edge_index };
        if !c.is_connected() {
            return Err(Error::InvalidComplex("complex is not connected".into()));
        }
        if (0..n_vertices).any(|v| !c.edges.iter().any(|e| e.contains(&v))) {
            return Err(Error::InvalidComplex("isolated vertex".into()));
        }
        if c.euler_characteristic() > 2 || c.euler_characteristic() % 2 != 0 {
            return Err(Error::InvalidComplex("Euler characteristic is not that of a closed orientable surface".into()));
        }
        Ok(c)
    }

    /// Orient unoriented triangles coherently (the first keeps its order),
    /// then validate.
    pub fn orient(n_vertices: usize, triangles: &[[usize; 3]]) -> Result<Self> {
        let m = triangles.len();
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, t) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                by_edge.entry((a.min(b), a.max(b))).or_default().push(i);
            }
        }
        let mut out: Vec<Option<[usize; 3]>> = vec![None; m];
        let mut queue = VecDeque::new();
        for start in 0..m {
            if out[start].is_some() {
                continue;
            }
            out[start] = Some(triangles[start]);
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                let t = out[i].expect("oriented");
                for e in 0..3 {
                    let (a, b) = (t[e], t[(e + 1) % 3]);
                    for &nb in &by_edge[&(a.min(b), a.max(b))] {
                        if nb == i {
                            continue;
                        }
                        let u = triangles[nb];
                        // the neighbour must traverse the shared edge as (b, a)
                        let has_ab = (0..3).any(|f| u[f] == a && u[(f + 1) % 3] == b);
                        let want = if has_ab { [u[0], u[2], u[1]] } else { u };
                        match out[nb] {
                            None => {
                                out[nb] = Some(want);
                                queue.push_back(nb);
                            }
                            Some(have) if perm_sign_rel(have, want) => {}
                            Some(_) => return Err(Error::InvalidComplex("surface is not orientable".into())),
                        }
                    }
                }
            }
        }
        Self::new(n_vertices, out.into_iter().map(|t| t.expect("oriented")).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Oriented triangles as supplied.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Triangles with increasing vertices.
    pub fn sorted_triangles(&self) -> &[[usize; 3]] {
        &self.sorted
    }

    /// Orientation sign of each sorted triangle.
    pub fn orientation_signs(&self) -> &[i64] {
        &self.signs
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edge_index.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn genus(&self) -> u32 {
        ((2 - self.euler_characteristic()) / 2) as u32
    }

    fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n_vertices];
        for e in &self.edges {
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Edges carrying free weights of a flat system: the complement of a
    /// spanning tree and a spanning tree of the dual graph built from the
    /// remaining edges. There are `2g` of them.
    pub fn free_edges(&self) -> Vec<usize> {
        let (tree, cotree) = self.tree_cotree();
        (0..self.edges.len()).filter(|&e| !tree[e] && !cotree[e]).collect()
    }

    fn tree_cotree(&self) -> (Vec<bool>, Vec<bool>) {
        let ne = self.edges.len();
        let mut tree = vec![false; ne];
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n_vertices];
        for (idx, e) in self.edges.iter().enumerate() {
            adj[e[0]].push((e[1], idx));
            adj[e[1]].push((e[0], idx));
        }
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, idx) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    tree[idx] = true;
                    queue.push_back(w);
                }
            }
        }
        let mut edge_tris: Vec<Vec<usize>> = vec![Vec::new(); ne];
        for (t, s) in self.sorted.iter().enumerate() {
            for (a, b) in [(s[0], s[1]), (s[1], s[2]), (s[0], s[2])] {
                edge_tris[self.edge_index[&(a, b)]].push(t);
            }
        }
        let mut cotree = vec![false; ne];
        let mut tseen = vec![false; self.triangles.len()];
        let mut queue = VecDeque::from([0usize]);
        tseen[0] = true;
        while let Some(t) = queue.pop_front() {
            let s = self.sorted[t];
            for (a, b) in [(s[0], s[1]), (s[1], s[2]), (s[0], s[2])] {
                let e = self.edge_index[&(a, b)];
                if tree[e] {
                    continue;
                }
                for &u in &edge_tris[e] {
                    if !tseen[u] {
                        tseen[u] = true;
                        cotree[e] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        (tree, cotree)
    }
}

fn perm_sign_rel(a: [usize; 3], b: [usize; 3]) -> bool {
    let mut sa = a;
    sa.sort_unstable();
    let mut sb = b;
    sb.sort_unstable();
    sa == sb && perm_sign(a) == perm_sign(b)
}

/// Shipped triangulations: the 7-vertex torus (genus 1) and the connected
/// sum of two copies of it (genus 2, 11 vertices, 39 edges, 26 triangles).
pub fn canonical_complex(genus: u32) -> Result<SurfaceComplex> {
    let torus = |offset: usize, map: &dyn Fn(usize) -> usize| -> Vec<[usize; 3]> {
        let mut t = Vec::new();
        for i in 0..7 {
            t.push([map(offset + i % 7), map(offset + (i + 1) % 7), map(offset + (i + 3) % 7)]);
            t.push([map(offset + i % 7), map(offset + (i + 2) % 7), map(offset + (i + 3) % 7)]);
        }
        t
    };
    match genus {
        1 => SurfaceComplex::orient(7, &torus(0, &|v| v)),
        2 => {
            // remove {0,1,3} from the first copy and {0,1,3} from the second,
            // glue along their boundaries; second-copy vertices 2,4,5,6 become 7..10
            let a: Vec<[usize; 3]> = torus(0, &|v| v).into_iter().filter(|t| !same_set(*t, [0, 1, 3])).collect();
            let relabel = |v: usize| match v {
                0 => 0,
                1 => 1,
                3 => 3,
                2 => 7,
                4 => 8,
                5 => 9,
                6 => 10,
                _ => unreachable!(),
            };
            let b: Vec<[usize; 3]> = torus(0, &|v| v)
                .into_iter()
                .filter(|t| !same_set(*t, [0, 1, 3]))
                .map(|t| [relabel(t[0]), relabel(t[1]), relabel(t[2])])
                .collect();
            let all: Vec<[usize; 3]> = a.into_iter().chain(b).collect();
            SurfaceComplex::orient(11, &all)
        }
        g => Err(Error::UnsupportedGenus(g)),
    }
}

fn same_set(a: [usize; 3], b: [usize; 3]) -> bool {
    let mut x = a;
    x.sort_unstable();
    let mut y = b;
    y.sort_unstable();
    x == y
}

/// Flat unit weights, one per edge `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryLocalSystem<F> {
    weights: Vec<F>,
}

impl<F: Field> UnitaryLocalSystem<F> {
    /// Check unit modulus and flatness on `c`.
    pub fn new(c: &SurfaceComplex, weights: Vec<F>) -> Result<Self> {
        if weights.len() != c.n_edges() {
            return Err(Error::InvalidInput(format!("expected {} edge weights, got {}", c.n_edges(), weights.len())));
        }
        for (idx, w) in weights.iter().enumerate() {
            if !w.is_unit_modulus() {
                let e = c.edges()[idx];
                return Err(Error::NotUnit((e[0], e[1])));
            }
        }
        let s = UnitaryLocalSystem { weights };
        for t in c.sorted_triangles() {
            let (ij, jk, ik) = (s.weight(c, t[0], t[1]), s.weight(c, t[1], t[2]), s.weight(c, t[0], t[2]));
            if ij.mul(&jk) != ik {
                return Err(Error::NonFlat(*t));
            }
        }
        Ok(s)
    }

    pub fn trivial(c: &SurfaceComplex) -> Self {
        UnitaryLocalSystem { weights: vec![F::one(); c.n_edges()] }
    }

    /// Flat system with the given weights on [`SurfaceComplex::free_edges`],
    /// weight 1 on a spanning tree, and the remaining weights forced by
    /// flatness.
    pub fn from_free_weights(c: &SurfaceComplex, free: &[F]) -> Result<Self> {
        let (tree, cotree) = c.tree_cotree();
        let free_idx: Vec<usize> = (0..c.n_edges()).filter(|&e| !tree[e] && !cotree[e]).collect();
        if free.len() != free_idx.len() {
            return Err(Error::InvalidInput(format!("expected {} free weights, got {}", free_idx.len(), free.len())));
        }
        let mut w: Vec<Option<F>> = (0..c.n_edges()).map(|e| tree[e].then(F::one)).collect();
        for (&e, x) in free_idx.iter().zip(free) {
            w[e] = Some(x.clone());
        }
        loop {
            let mut progress = false;
            let mut missing = false;
            for t in c.sorted_triangles() {
                let ids = [
                    c.edge_index(t[0], t[1]).expect("edge"),
                    c.edge_index(t[1], t[2]).expect("edge"),
                    c.edge_index(t[0], t[2]).expect("edge"),
                ];
                let unknown: Vec<usize> = (0..3).filter(|&p| w[ids[p]].is_none()).collect();
                if unknown.is_empty() {
                    continue;
                }
                missing = true;
                if unknown.len() != 1 {
                    continue;
                }
                let get = |p: usize| w[ids[p]].clone().expect("known");
                // w_ij w_jk = w_ik
                let val = match unknown[0] {
                    0 => get(2).div(&get(1)),
                    1 => get(2).div(&get(0)),
                    _ => Some(get(0).mul(&get(1))),
                }
                .ok_or(Error::ZeroLinearCoefficient)?;
                w[ids[unknown[0]]] = Some(val);
                progress = true;
            }
            if !missing {
                break;
            }
            if !progress {
                return Err(Error::InvalidComplex("flatness propagation stalled".into()));
            }
        }
        Self::new(c, w.into_iter().map(|x| x.expect("assigned")).collect())
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    /// Weight transporting from `j` to `i`.
    pub fn weight(&self, c: &SurfaceComplex, i: usize, j: usize) -> F {
        let w = &self.weights[c.edge_index(i, j).expect("edge of the complex")];
        if i < j {
            w.clone()
        } else {
            w.inv().expect("unit")
        }
    }

    /// `Σ^k`: every weight raised to the `k`-th power.
    pub fn power(&self, k: i64) -> Self {
        UnitaryLocalSystem { weights: self.weights.iter().map(|w| w.pow(k).expect("unit")).collect() }
    }

    pub fn tensor(&self, o: &Self) -> Self {
        UnitaryLocalSystem { weights: self.weights.iter().zip(&o.weights).map(|(a, b)| a.mul(b)).collect() }
    }

    /// All weights equal to 1 (a gauge-fixed trivial system).
    pub fn is_trivial(&self) -> bool {
        self.weights.iter().all(|w| w.is_one())
    }
}

/// `local_system_power(L, k)`.
pub fn local_system_power<F: Field>(l: &UnitaryLocalSystem<F>, k: i64) -> UnitaryLocalSystem<F> {
    l.power(k)
}

/// Values on vertices, edges `i < j`, or triangles `i < j < k`, in the
/// complex's index order.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedCochain<F> {
    pub degree: usize,
    pub values: Vec<F>,
}

impl<F: Field> TwistedCochain<F> {
    pub fn new(degree: usize, values: Vec<F>) -> Self {
        TwistedCochain { degree, values }
    }

    pub fn zero(c: &SurfaceComplex, degree: usize) -> Self {
        let n = match degree {
            0 => c.n_vertices(),
            1 => c.n_edges(),
            _ => c.n_triangles(),
        };
        TwistedCochain { degree, values: vec![F::zero(); n] }
    }

    pub fn add(&self, o: &Self) -> Self {
        TwistedCochain { degree: self.degree, values: self.values.iter().zip(&o.values).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        TwistedCochain { degree: self.degree, values: self.values.iter().zip(&o.values).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, s: &F) -> Self {
        TwistedCochain { degree: self.degree, values: self.values.iter().map(|a| a.mul(s)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Value on the oriented edge `(i, j)`: `a_ji = -w_ji a_ij`.
    pub fn edge_value(&self, c: &SurfaceComplex, l: &UnitaryLocalSystem<F>, i: usize, j: usize) -> F {
        let v = &self.values[c.edge_index(i, j).expect("edge")];
        if i < j {
            v.clone()
        } else {
            l.weight(c, i, j).mul(v).neg()
        }
    }
}

/// Matrix of `δ⁰` (edges × vertices).
pub fn d0_matrix<F: Field>(c: &SurfaceComplex, l: &UnitaryLocalSystem<F>) -> Matrix<F> {
    let mut m = Matrix::zeros(c.n_edges(), c.n_vertices());
    for (r, e) in c.edges().iter().enumerate() {
        m.set(r, e[1], l.weights()[r].clone());
        let v = m.get(r, e[0]).sub(&F::one());
        m.set(r, e[0], v);
    }
    m
}

/// Matrix of `δ¹` (triangles × edges).
pub fn d1_matrix<F: Field>(c: &SurfaceComplex, l: &UnitaryLocalSystem<F>) -> Matrix<F> {
    let mut m = Matrix::zeros(c.n_triangles(), c.n_edges());
    for (r, t) in c.sorted_triangles().iter().enumerate() {
        let ij = c.edge_index(t[0], t[1]).expect("edge");
        let jk = c.edge_index(t[1], t[2]).expect("edge");
        let ik = c.edge_index(t[0], t[2]).expect("edge");
        m.set(r, ij, F::one());
        m.set(r, jk, l.weight(c, t[0], t[1]));
        m.set(r, ik, F::one().neg());
    }
    m
}

pub fn coboundary<F: Field>(c: &SurfaceComplex, l: &UnitaryLocalSystem<F>, x: &TwistedCochain<F>) -> TwistedCochain<F> {
    match x.degree {
        0 => TwistedCochain::new(1, d0_matrix(c, l).mul_vec(&x.values)),
        1 => TwistedCochain::new(2, d1_matrix(c, l).mul_vec(&x.values)),
        _ => TwistedCochain::zero(c, 3),
    }
}

/// Cohomology dimensions from certified ranks, without bases.
pub fn cohomology_dims<F: Field>(c: &SurfaceComplex, l: &UnitaryLocalSystem<F>) -> [usize; 3] {
    let r0 = d0_matrix(c, l).rank_certified();
    let r1 = d1_matrix(c, l).rank_certified();
    [c.n_vertices() - r0, c.n_edges() - r0 - r1, c.n_triangles() - r1]
}

/// Representatives of a basis of `H^p` and their number.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyBasis<F> {
    pub degree: usize,
    pub reps: Vec<TwistedCochain<F>>,
}

impl<F: Field> CohomologyBasis<F> {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
}

/// Outcome of [`Cohomology::solve_coboundary`].
#[derive(Clone, Debug, PartialEq)]
pub enum CoboundarySolution<F> {
    Primitive(TwistedCochain<F>),
    /// The cocycle is not a coboundary; coordinates of its class.
    Class(Vec<F>),
}

/// Twisted cochain complex with bases of `H⁰, H¹, H²` and cached
/// eliminations for solving and projecting.
#[derive(Clone, Debug)]
pub struct Cohomology<F> {
    complex: SurfaceComplex,
    system: UnitaryLocalSystem<F>,
    d1: Matrix<F>,
    pub bases: [CohomologyBasis<F>; 3],
    solve0: Rref<F>,
    solve1: Rref<F>,
    proj1: Rref<F>,
    proj2: Rref<F>,
}

/// Pivot columns beyond `offset` of `[a | extra]`.
fn complement_columns<F: Field>(a: &Matrix<F>, extra: &[Vec<F>]) -> Vec<usize> {
    let m = a.hcat(&Matrix::from_columns(a.rows(), extra));
    Rref::new(&m, false).pivots().iter().filter(|&&p| p >= a.cols()).map(|&p| p - a.cols()).collect()
}

pub fn cohomology<F: Field>(c: &SurfaceComplex, l: &UnitaryLocalSystem<F>) -> Result<Cohomology<F>> {
    let l = UnitaryLocalSystem::new(c, l.weights().to_vec())?;
    let d0 = d0_matrix(c, &l);
    let d1 = d1_matrix(c, &l);
    let solve0 = Rref::new(&d0, true);
    let solve1 = Rref::new(&d1, true);
    let h0: Vec<TwistedCochain<F>> = solve0.kernel().into_iter().map(|v| TwistedCochain::new(0, v)).collect();
    let z1 = solve1.kernel();
    let picks = complement_columns(&d0, &z1);
    let h1: Vec<TwistedCochain<F>> = picks.iter().map(|&i| TwistedCochain::new(1, z1[i].clone())).collect();
    let nf = c.n_triangles();
    let units: Vec<Vec<F>> = (0..nf)
        .map(|t| (0..nf).map(|s| if s == t { F::one() } else { F::zero() }).collect())
        .collect();
    let picks2 = complement_columns(&d1, &units);
    let h2: Vec<TwistedCochain<F>> = picks2.iter().map(|&i| TwistedCochain::new(2, units[i].clone())).collect();
    let r1: Vec<Vec<F>> = h1.iter().map(|x| x.values.clone()).collect();
    let r2: Vec<Vec<F>> = h2.iter().map(|x| x.values.clone()).collect();
    let proj1 = Rref::new(&d0.hcat(&Matrix::from_columns(c.n_edges(), &r1)), true);
    let proj2 = Rref::new(&d1.hcat(&Matrix::from_columns(nf, &r2)), true);
    Ok(Cohomology {
        complex: c.clone(),
        system: l,
        d1,
        bases: [
            CohomologyBasis { degree: 0, reps: h0 },
            CohomologyBasis { degree: 1, reps: h1 },
            CohomologyBasis { degree: 2, reps: h2 },
        ],
        solve0,
        solve1,
        proj1,
        proj2,
    })
}

impl<F: Field> Cohomology<F> {
    pub fn dims(&self) -> [usize; 3] {
        [self.bases[0].dim(), self.bases[1].dim(), self.bases[2].dim()]
    }

    pub fn complex(&self) -> &SurfaceComplex {
        &self.complex
    }

    pub fn system(&self) -> &UnitaryLocalSystem<F> {
        &self.system
    }

    /// First triangle on which a 1-cochain fails the cocycle condition.
    pub fn check_cocycle(&self, z: &TwistedCochain<F>) -> Result<()> {
        if z.degree != 1 {
            return Ok(());
        }
        let dz = self.d1.mul_vec(&z.values);
        match dz.iter().position(|x| !x.is_zero()) {
            Some(t) => Err(Error::NotCocycle(self.complex.sorted_triangles()[t].to_vec())),
            None => Ok(()),
        }
    }

    /// Coordinates of the class of a cocycle in the basis representatives.
    pub fn project(&self, z: &TwistedCochain<F>) -> Result<Vec<F>> {
        self.check_cocycle(z)?;
        let (rref, offset) = match z.degree {
            1 => (&self.proj1, self.complex.n_vertices()),
            2 => (&self.proj2, self.complex.n_edges()),
            d => return Err(Error::InvalidInput(format!("no projection in degree {d}"))),
        };
        let x = rref.solve(&z.values).map_err(|_| Error::InvalidInput("projection system is inconsistent".into()))?;
        Ok(x[offset..].to_vec())
    }

    /// A primitive of a cocycle of degree 1 or 2 with free variables pinned
    /// to zero, or the coordinates of its class when none exists.
    pub fn solve_coboundary(&self, z: &TwistedCochain<F>) -> Result<CoboundarySolution<F>> {
        self.check_cocycle(z)?;
        let (rref, deg) = match z.degree {
            1 => (&self.solve0, 0),
            2 => (&self.solve1, 1),
            d => return Err(Error::InvalidInput(format!("cannot solve in degree {d}"))),
        };
        match rref.solve(&z.values) {
            Ok(x) => Ok(CoboundarySolution::Primitive(TwistedCochain::new(deg, x))),
            Err(_) => Ok(CoboundarySolution::Class(self.project(z)?)),
        }
    }
}

/// `(u∪v)_ijk = u_ij · w^{(b)}_ij · v_jk` on increasing triangles: the second
/// factor is transported to the first vertex by the weight of its system.
pub fn cup_cochain<F: Field>(
    c: &SurfaceComplex,
    u: &TwistedCochain<F>,
    v: &TwistedCochain<F>,
    lb: &UnitaryLocalSystem<F>,
) -> TwistedCochain<F> {
    let values = c
        .sorted_triangles()
        .iter()
        .map(|t| {
            let ij = c.edge_index(t[0], t[1]).expect("edge");
            let jk = c.edge_index(t[1], t[2]).expect("edge");
            u.values[ij].mul(&lb.weight(c, t[0], t[1])).mul(&v.values[jk])
        })
        .collect();
    TwistedCochain::new(2, values)
}

/// Evaluation of a 2-cochain with trivial coefficients on the fundamental
/// cycle `Σ ε_T T`.
pub fn fundamental_evaluation<F: Field>(c: &SurfaceComplex, x: &TwistedCochain<F>) -> F {
    let mut acc = F::zero();
    for (v, &s) in x.values.iter().zip(c.orientation_signs()) {
        acc = acc.add(&v.scale(s));
    }
    acc
}

/// `⟨u∪v, [Y]⟩` for `u` in `Σ_a`, `v` in `Σ_b` with `Σ_a ⊗ Σ_b` trivial.
pub fn cup_product<F: Field>(
    c: &SurfaceComplex,
    la: &UnitaryLocalSystem<F>,
    u: &TwistedCochain<F>,
    lb: &UnitaryLocalSystem<F>,
    v: &TwistedCochain<F>,
) -> Result<F> {
    if !la.tensor(lb).is_trivial() {
        return Err(Error::NotDual);
    }
    Ok(fundamental_evaluation(c, &cup_cochain(c, u, v, lb)))
}

/// Matrix of the cup pairing between the `H¹` bases of two dual systems.
pub fn pairing_matrix<F: Field>(ha: &Cohomology<F>, hb: &Cohomology<F>) -> Result<Matrix<F>> {
    let c = ha.complex();
    let mut rows = Vec::new();
    for u in &ha.bases[1].reps {
        let mut row = Vec::new();
        for v in &hb.bases[1].reps {
            row.push(cup_product(c, ha.system(), u, hb.system(), v)?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, hb.bases[1].dim()));
    }
    Ok(Matrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Cyclotomic;

    type Q = Cyclotomic;

    fn system(c: &SurfaceComplex, m: u64, exps: &[i64]) -> UnitaryLocalSystem<Q> {
        let free: Vec<Q> = exps.iter().map(|&e| Q::root_of_unity(m, e)).collect();
        UnitaryLocalSystem::from_free_weights(c, &free).unwrap()
    }

    #[test]
    fn shipped_complexes() {
        let t = canonical_complex(1).unwrap();
        assert_eq!((t.n_vertices(), t.n_edges(), t.n_triangles()), (7, 21, 14));
        assert_eq!(t.euler_characteristic(), 0);
        assert_eq!(t.free_edges().len(), 2);
        let g2 = canonical_complex(2).unwrap();
        assert_eq!((g2.n_vertices(), g2.n_edges(), g2.n_triangles()), (11, 39, 26));
        assert_eq!(g2.euler_characteristic(), -2);
        assert_eq!(g2.free_edges().len(), 4);
        assert_eq!(canonical_complex(3), Err(Error::UnsupportedGenus(3)));
    }

    #[test]
    fn rejects_bad_complexes() {
        // a single triangle has boundary
        assert!(SurfaceComplex::new(3, vec![[0, 1, 2]]).is_err());
        // tetrahedron with one face flipped
        let bad = vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 3, 2]];
        assert!(SurfaceComplex::new(4, bad).is_err());
        let sphere = SurfaceComplex::orient(4, &[[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]]).unwrap();
        assert_eq!(sphere.genus(), 0);
    }

    // Independent oracle: dimensions from ranks of explicitly assembled
    // boundary matrices of the untwisted chain complex.
    fn betti_oracle(c: &SurfaceComplex) -> [usize; 3] {
        let mut b1 = Matrix::<Q>::zeros(c.n_vertices(), c.n_edges());
        for (j, e) in c.edges().iter().enumerate() {
            b1.set(e[1], j, Q::one());
            b1.set(e[0], j, Q::from_i64(-1));
        }
        let mut b2 = Matrix::<Q>::zeros(c.n_edges(), c.n_triangles());
        for (j, t) in c.sorted_triangles().iter().enumerate() {
            b2.set(c.edge_index(t[1], t[2]).unwrap(), j, Q::one());
            b2.set(c.edge_index(t[0], t[2]).unwrap(), j, Q::from_i64(-1));
            b2.set(c.edge_index(t[0], t[1]).unwrap(), j, Q::one());
        }
        let r1 = b1.rank();
        let r2 = b2.rank();
        [c.n_vertices() - r1, c.n_edges() - r1 - r2, c.n_triangles() - r2]
    }

    #[test]
    fn trivial_coefficients() {
        for g in [1, 2] {
            let c = canonical_complex(g).unwrap();
            let h = cohomology(&c, &UnitaryLocalSystem::<Q>::trivial(&c)).unwrap();
            assert_eq!(h.dims(), betti_oracle(&c));
            assert_eq!(h.dims(), [1, 2 * g as usize, 1]);
        }
    }

    #[test]
    fn twisted_examples() {
        let c2 = canonical_complex(2).unwrap();
        let l = system(&c2, 5, &[1, 0, 2, 3]);
        assert_eq!(cohomology(&c2, &l).unwrap().dims(), [0, 2, 0]);
        assert_eq!(cohomology_dims(&c2, &l), [0, 2, 0]);
        let c1 = canonical_complex(1).unwrap();
        let l2 = system(&c1, 2, &[1, 0]);
        assert_eq!(cohomology(&c1, &l2).unwrap().dims(), [0, 0, 0]);
        assert_eq!(cohomology_dims(&c1, &l2), [0, 0, 0]);
    }

    #[test]
    fn powers() {
        let c = canonical_complex(1).unwrap();
        let l = system(&c, 3, &[1, 2]);
        assert!(l.power(0).is_trivial());
        assert_eq!(l.power(1), l);
        assert!(l.power(3).is_trivial());
        assert!(!l.power(2).is_trivial());
        assert!(UnitaryLocalSystem::new(&c, l.power(2).weights().to_vec()).is_ok());
    }

    #[test]
    fn non_flat_rejected() {
        let c = canonical_complex(1).unwrap();
        let mut w = vec![Q::one(); c.n_edges()];
        w[0] = Q::root_of_unity(4, 1);
        assert!(matches!(UnitaryLocalSystem::new(&c, w), Err(Error::NonFlat(_))));
        let mut w = vec![Q::one(); c.n_edges()];
        w[0] = Q::from_i64(2);
        assert!(matches!(UnitaryLocalSystem::new(&c, w), Err(Error::NotUnit(_))));
    }

    #[test]
    fn coboundary_round_trip_and_classes() {
        let c = canonical_complex(1).unwrap();
        let l = UnitaryLocalSystem::<Q>::trivial(&c);
        let h = cohomology(&c, &l).unwrap();
        let x = TwistedCochain::new(0, (0..7).map(|i| Q::from_i64(i * i - 3)).collect());
        let z = coboundary(&c, &l, &x);
        match h.solve_coboundary(&z).unwrap() {
            CoboundarySolution::Primitive(p) => assert_eq!(coboundary(&c, &l, &p), z),
            other => panic!("{other:?}"),
        }
        let rep = h.bases[1].reps[0].clone();
        assert_eq!(h.solve_coboundary(&rep).unwrap(), CoboundarySolution::Class(vec![Q::one(), Q::zero()]));
        let shifted = rep.add(&z);
        assert_eq!(h.project(&shifted).unwrap(), vec![Q::one(), Q::zero()]);
        let mut bad = TwistedCochain::zero(&c, 1);
        bad.values[0] = Q::one();
        assert!(matches!(h.solve_coboundary(&bad), Err(Error::NotCocycle(_))));
    }

    #[test]
    fn degree_two_solvable_with_nontrivial_system() {
        let c = canonical_complex(1).unwrap();
        let l = system(&c, 3, &[0, 1]);
        let h = cohomology(&c, &l).unwrap();
        let z = TwistedCochain::new(2, (0..14).map(|i| Q::from_i64(i % 5 - 2)).collect());
        match h.solve_coboundary(&z).unwrap() {
            CoboundarySolution::Primitive(p) => assert_eq!(coboundary(&c, &l, &p), z),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn d_squared_vanishes() {
        for g in [1, 2] {
            let c = canonical_complex(g).unwrap();
            let l = system(&c, 7, &vec![3; 2 * g as usize]);
            let x = TwistedCochain::new(0, (0..c.n_vertices()).map(|i| Q::from_i64(i as i64 + 1)).collect());
            assert!(coboundary(&c, &l, &coboundary(&c, &l, &x)).is_zero());
        }
    }

    #[test]
    fn torus_intersection_form() {
        let c = canonical_complex(1).unwrap();
        let l = UnitaryLocalSystem::<Q>::trivial(&c);
        let h = cohomology(&c, &l).unwrap();
        let m = pairing_matrix(&h, &h).unwrap();
        assert_eq!(m.rank(), 2);
        for i in 0..2 {
            assert!(m.get(i, i).is_zero());
        }
        assert_eq!(*m.get(0, 1), m.get(1, 0).neg());
        // the pairing only depends on classes
        let x = TwistedCochain::new(0, (0..7).map(|i| Q::from_i64(2 * i - 5)).collect());
        let u = h.bases[1].reps[0].add(&coboundary(&c, &l, &x));
        let v = h.bases[1].reps[1].clone();
        assert_eq!(cup_product(&c, &l, &u, &l, &v).unwrap(), *m.get(0, 1));
    }

    #[test]
    fn twisted_pairing_genus_two() {
        let c = canonical_complex(2).unwrap();
        let l = system(&c, 5, &[1, 2, 0, 4]);
        let hm = cohomology(&c, &l.power(-1)).unwrap();
        let hp = cohomology(&c, &l).unwrap();
        let m = pairing_matrix(&hm, &hp).unwrap();
        assert_eq!(m.rank(), 2);
        let mt = pairing_matrix(&hp, &hm).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(*mt.get(j, i), m.get(i, j).neg());
            }
        }
        let u = &hm.bases[1].reps[0];
        assert_eq!(cup_product(&c, &l, u, &l, u), Err(Error::NotDual));
    }
}
