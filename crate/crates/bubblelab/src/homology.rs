//! Simplicial models of M and of the barycenter spaces ℬ₁(M), ℬ₂(M), with homology
//! over GF(2).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangulatedKind {
    Circle,
    Sphere2,
}

impl std::str::FromStr for TriangulatedKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(TriangulatedKind::Circle),
            "sphere2" => Ok(TriangulatedKind::Sphere2),
            _ => Err(LabError::InvalidParameter(format!("unknown triangulated model '{s}'"))),
        }
    }
}

/// A finite simplicial complex with simplices stored per dimension as sorted tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    pub n_vertices: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    pub fn empty() -> Self {
        SimplicialComplex { n_vertices: 0, simplices: vec![] }
    }

    pub fn point() -> Self {
        SimplicialComplex { n_vertices: 1, simplices: vec![vec![vec![0]]] }
    }

    /// The complex generated by the given simplices and all their faces.
    pub fn from_maximal(n_vertices: usize, maximal: &[Vec<usize>]) -> Result<Self> {
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in maximal {
            let mut s = s.clone();
            s.sort_unstable();
            if s.is_empty() || s.windows(2).any(|w| w[0] == w[1]) || s.iter().any(|&v| v >= n_vertices) {
                return Err(LabError::InvalidParameter(format!("malformed simplex {s:?}")));
            }
            let m = s.len();
            for mask in 1u64..(1u64 << m) {
                set.insert((0..m).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect());
            }
        }
        let top = set.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut simplices = vec![Vec::new(); top];
        for s in set {
            simplices[s.len() - 1].push(s);
        }
        Ok(SimplicialComplex { n_vertices, simplices })
    }

    pub fn dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, |s| s.len())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().enumerate().map(|(d, s)| if d % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) }).sum()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.simplices.get(s.len().wrapping_sub(1)).is_some_and(|l| l.binary_search(&s.to_vec()).is_ok())
    }

    /// Plain-text form: a `vertices N` header, then one simplex per line.
    pub fn to_simplex_list(&self) -> String {
        let mut out = format!("vertices {}\n", self.n_vertices);
        for layer in &self.simplices {
            for s in layer {
                let line: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    pub fn from_simplex_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or_else(|| LabError::InvalidParameter("empty simplex list".into()))?;
        let n_vertices = header
            .strip_prefix("vertices ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| LabError::InvalidParameter(format!("bad header '{header}'")))?;
        let mut simplices = Vec::new();
        for l in lines {
            let s: std::result::Result<Vec<usize>, _> = l.split_whitespace().map(str::parse).collect();
            simplices.push(s.map_err(|e| LabError::InvalidParameter(format!("bad simplex line '{l}': {e}")))?);
        }
        let c = SimplicialComplex::from_maximal(n_vertices, &simplices)?;
        let total: usize = c.simplices.iter().map(|s| s.len()).sum();
        if total != simplices.len() {
            return Err(LabError::InvalidParameter("simplex list is not closed under faces or has duplicates".into()));
        }
        Ok(c)
    }
}

/// One barycentric subdivision: vertices are the simplices of `k`, simplices are chains.
pub fn barycentric_subdivision(k: &SimplicialComplex) -> SimplicialComplex {
    let cells: Vec<Vec<usize>> = k.simplices.iter().flatten().cloned().collect();
    let index: HashMap<&Vec<usize>, usize> = cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let faces: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| {
            let m = c.len();
            (1u64..(1u64 << m) - 1)
                .map(|mask| index[&(0..m).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect::<Vec<_>>()])
                .collect()
        })
        .collect();
    let dims: Vec<usize> = cells.iter().map(|c| c.len() - 1).collect();
    let chains = order_complex(&faces, &dims);
    SimplicialComplex::from_maximal(cells.len(), &chains).expect("chains are simplices")
}

/// Maximal chains of a graded poset given by the proper faces and rank of every element.
fn order_complex(proper_faces: &[Vec<usize>], dims: &[usize]) -> Vec<Vec<usize>> {
    let n = proper_faces.len();
    let mut is_face = vec![false; n];
    for f in proper_faces {
        for &x in f {
            is_face[x] = true;
        }
    }
    let mut out = Vec::new();
    let mut chain = Vec::new();
    fn down(x: usize, pf: &[Vec<usize>], dims: &[usize], chain: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        chain.push(x);
        if dims[x] == 0 {
            out.push(chain.clone());
        }
        for &y in &pf[x] {
            if dims[y] + 1 == dims[x] {
                down(y, pf, dims, chain, out);
            }
        }
        chain.pop();
    }
    for x in 0..n {
        if !is_face[x] {
            down(x, proper_faces, dims, &mut chain, &mut out);
        }
    }
    out
}

/// Triangulations of S¹ (an N-gon, N ≥ 3) and S² (level 1 is the octahedron, each
/// further level splits every triangle 4-to-1).
pub fn triangulate_model(kind: TriangulatedKind, resolution: usize) -> Result<SimplicialComplex> {
    match kind {
        TriangulatedKind::Circle => {
            if resolution < 3 {
                return Err(LabError::InvalidParameter(format!("circle needs at least 3 vertices, got {resolution}")));
            }
            let edges: Vec<Vec<usize>> = (0..resolution).map(|i| vec![i, (i + 1) % resolution]).collect();
            SimplicialComplex::from_maximal(resolution, &edges)
        }
        TriangulatedKind::Sphere2 => {
            if resolution < 1 {
                return Err(LabError::InvalidParameter("sphere2 needs subdivision level at least 1".into()));
            }
            let mut nv = 6;
            let mut tris: Vec<[usize; 3]> = vec![
                [0, 2, 4],
                [2, 1, 4],
                [1, 3, 4],
                [3, 0, 4],
                [2, 0, 5],
                [1, 2, 5],
                [3, 1, 5],
                [0, 3, 5],
            ];
            for _ in 1..resolution {
                let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
                let mut m = |a: usize, b: usize, nv: &mut usize| -> usize {
                    *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                        *nv += 1;
                        *nv - 1
                    })
                };
                let mut next = Vec::with_capacity(tris.len() * 4);
                for [a, b, c] in tris {
                    let ab = m(a, b, &mut nv);
                    let bc = m(b, c, &mut nv);
                    let ca = m(c, a, &mut nv);
                    next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
                }
                tris = next;
            }
            let maximal: Vec<Vec<usize>> = tris.iter().map(|t| t.to_vec()).collect();
            SimplicialComplex::from_maximal(nv, &maximal)
        }
    }
}

/// ℬ_d(M) with its subcomplex ℬ_{d-1}(M).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarycenterComplexPair {
    pub d: usize,
    pub complex: SimplicialComplex,
    pub sub: SimplicialComplex,
    /// Vertex map of the inclusion ℬ_{d-1} → ℬ_d.
    pub inclusion: Vec<usize>,
}

impl BarycenterComplexPair {
    /// Simplices of the subcomplex, mapped into the ambient vertex labels.
    pub fn sub_in_ambient(&self) -> Vec<Vec<usize>> {
        self.sub
            .simplices
            .iter()
            .flatten()
            .map(|s| {
                let mut t: Vec<usize> = s.iter().map(|&v| self.inclusion[v]).collect();
                t.sort_unstable();
                t
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Label {
    Cell(usize),
    Pair(usize, usize),
}

/// Builds ℬ_d(M) for d ∈ {1, 2}. For d = 2 the product cell complex M×M×[0,1] is
/// subdivided barycentrically and the identifications are applied to vertex labels.
pub fn barycenter_complex(m: &SimplicialComplex, d: usize) -> Result<BarycenterComplexPair> {
    match d {
        1 => Ok(BarycenterComplexPair { d, complex: m.clone(), sub: SimplicialComplex::empty(), inclusion: vec![] }),
        2 => barycenter2(m),
        _ => Err(LabError::InvalidParameter(format!("barycenter spaces are built for d = 1, 2 only, got {d}"))),
    }
}

const SIZE_LIMIT: usize = 2_000_000;

fn barycenter2(m: &SimplicialComplex) -> Result<BarycenterComplexPair> {
    let cells: Vec<Vec<usize>> = m.simplices.iter().flatten().cloned().collect();
    if cells.is_empty() {
        return Err(LabError::InvalidParameter("empty manifold complex".into()));
    }
    let index: HashMap<&Vec<usize>, usize> = cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    // All faces of each cell, itself included.
    let faces: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| {
            let k = c.len();
            (1u64..(1u64 << k))
                .map(|mask| index[&(0..k).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect::<Vec<_>>()])
                .collect()
        })
        .collect();
    let nc = cells.len();
    // Product cells (s, t, e) with e = 0, 1 (endpoints) or 2 (the interval).
    let id = |s: usize, t: usize, e: usize| (s * nc + t) * 3 + e;
    let total = nc * nc * 3;
    let flags = {
        let top = cells.iter().map(|c| c.len() - 1).max().unwrap_or(0);
        let fact = |k: usize| (1..=k).product::<usize>();
        let per = fact(top + 1).pow(2) * 2 * fact(2 * top + 1) / (fact(top).pow(2));
        per * cells.iter().filter(|c| c.len() == top + 1).count().pow(2)
    };
    if flags > SIZE_LIMIT {
        return Err(LabError::InvalidParameter(format!(
            "ℬ₂ of this complex needs about {flags} top simplices; limit is {SIZE_LIMIT}"
        )));
    }
    let mut proper: Vec<Vec<usize>> = vec![Vec::new(); total];
    for s in 0..nc {
        for t in 0..nc {
            for e in 0..3 {
                let es: &[usize] = if e == 2 { &[0, 1, 2] } else { std::slice::from_ref(&e) };
                let mut pf = Vec::new();
                for &fs in &faces[s] {
                    for &ft in &faces[t] {
                        for &fe in es {
                            if (fs, ft, fe) != (s, t, e) {
                                pf.push(id(fs, ft, fe));
                            }
                        }
                    }
                }
                proper[id(s, t, e)] = pf;
            }
        }
    }
    let mut dims = vec![0; total];
    for s in 0..nc {
        for t in 0..nc {
            for e in 0..3 {
                dims[id(s, t, e)] = cells[s].len() + cells[t].len() - 2 + usize::from(e == 2);
            }
        }
    }
    let chains = order_complex(&proper, &dims);
    let label_of = |v: usize| -> Label {
        let e = v % 3;
        let st = v / 3;
        let (s, t) = (st / nc, st % nc);
        match e {
            0 => Label::Cell(t),
            1 => Label::Cell(s),
            _ if s == t => Label::Cell(s),
            _ => Label::Pair(s.min(t), s.max(t)),
        }
    };
    let mut labels: Vec<Label> = (0..total).map(label_of).collect::<BTreeSet<_>>().into_iter().collect();
    labels.sort();
    let lid: HashMap<Label, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut images: BTreeSet<Vec<usize>> = BTreeSet::new();
    for ch in &chains {
        let mut img: Vec<usize> = ch.iter().map(|&v| lid[&label_of(v)]).collect();
        img.sort_unstable();
        img.dedup();
        images.insert(img);
    }
    let maximal: Vec<Vec<usize>> = images.into_iter().collect();
    let complex = SimplicialComplex::from_maximal(labels.len(), &maximal)?;
    let sub = barycentric_subdivision(m);
    let inclusion: Vec<usize> = (0..nc).map(|c| lid[&Label::Cell(c)]).collect();
    Ok(BarycenterComplexPair { d: 2, complex, sub, inclusion })
}

/// Boundary operators over GF(2); column j of `boundary[d]` lists the (d-1)-faces of
/// the j-th d-simplex. `boundary[0]` is empty.
#[derive(Debug, Clone)]
pub struct ChainComplexGF2 {
    pub ranks: Vec<usize>,
    pub boundary: Vec<Vec<Vec<usize>>>,
}

impl ChainComplexGF2 {
    /// Chain complex of `k`, relative to the simplices in `exclude` when given.
    pub fn new(k: &SimplicialComplex, exclude: Option<&[Vec<usize>]>) -> Self {
        let excl: BTreeSet<&Vec<usize>> = exclude.map(|e| e.iter().collect()).unwrap_or_default();
        let kept: Vec<Vec<&Vec<usize>>> =
            k.simplices.iter().map(|l| l.iter().filter(|s| !excl.contains(s)).collect()).collect();
        let index: Vec<HashMap<&Vec<usize>, usize>> =
            kept.iter().map(|l| l.iter().enumerate().map(|(i, s)| (*s, i)).collect()).collect();
        let mut boundary = vec![Vec::new()];
        for d in 1..kept.len() {
            let cols: Vec<Vec<usize>> = kept[d]
                .iter()
                .map(|s| {
                    let mut rows: Vec<usize> = (0..s.len())
                        .filter_map(|skip| {
                            let f: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                            index[d - 1].get(&f).copied()
                        })
                        .collect();
                    rows.sort_unstable();
                    rows
                })
                .collect();
            boundary.push(cols);
        }
        ChainComplexGF2 { ranks: kept.iter().map(|l| l.len()).collect(), boundary }
    }

    /// Whether ∂_{d}∘∂_{d+1} vanishes for every d.
    pub fn boundary_squared_vanishes(&self) -> bool {
        for d in 1..self.boundary.len().saturating_sub(1) {
            for col in &self.boundary[d + 1] {
                let mut acc: HashMap<usize, bool> = HashMap::new();
                for &f in col {
                    for &g in &self.boundary[d][f] {
                        let e = acc.entry(g).or_insert(false);
                        *e = !*e;
                    }
                }
                if acc.values().any(|&v| v) {
                    return false;
                }
            }
        }
        true
    }

    /// GF(2) rank of ∂_d by dense elimination on bit-packed columns.
    pub fn boundary_rank(&self, d: usize) -> usize {
        match self.boundary.get(d) {
            Some(cols) if d > 0 => gf2_rank(self.ranks[d - 1], cols),
            _ => 0,
        }
    }

    pub fn betti(&self) -> Vec<usize> {
        let top = self.ranks.len();
        let r: Vec<usize> = (0..=top).map(|d| if d < top { self.boundary_rank(d) } else { 0 }).collect();
        (0..top).map(|d| self.ranks[d] - r[d] - r[d + 1]).collect()
    }
}

fn gf2_rank(rows: usize, cols: &[Vec<usize>]) -> usize {
    let words = rows.div_ceil(64);
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; rows];
    let mut rank = 0;
    for col in cols {
        let mut v = vec![0u64; words];
        for &r in col {
            v[r / 64] ^= 1 << (r % 64);
        }
        loop {
            let lead = v.iter().enumerate().rev().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize);
            match lead {
                None => break,
                Some(l) => match &pivots[l] {
                    Some(p) => v.iter_mut().zip(p).for_each(|(a, b)| *a ^= b),
                    None => {
                        pivots[l] = Some(v);
                        rank += 1;
                        break;
                    }
                },
            }
        }
    }
    rank
}

/// Z₂ Betti numbers of a complex.
pub fn homology(k: &SimplicialComplex) -> Vec<usize> {
    ChainComplexGF2::new(k, None).betti()
}

/// Z₂ Betti numbers of H_*(ℬ_d, ℬ_{d-1}).
pub fn relative_homology(pair: &BarycenterComplexPair) -> Vec<usize> {
    let sub = pair.sub_in_ambient();
    ChainComplexGF2::new(&pair.complex, Some(&sub)).betti()
}

/// Z₂ Betti numbers of H_*(K, L) for a subcomplex L given by its simplices.
pub fn relative_homology_of(k: &SimplicialComplex, l: &[Vec<usize>]) -> Vec<usize> {
    ChainComplexGF2::new(k, Some(l)).betti()
}
