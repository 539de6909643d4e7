//! Periodic box lattice `[1, m]^d`, its Laplacian and the block variance profile.

use crate::error::{Error, Result};

/// Periodic lattice with sites in lexicographic order.
///
/// `edges` lists unordered neighbor pairs with multiplicity: for `m = 2` the two
/// wrap directions land on the same neighbor, so each such pair appears twice.
/// For `m = 1` there are no edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub d: usize,
    pub m: usize,
    /// 1-based multi-indices.
    pub sites: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Multiplicity-weighted neighbor count of every site.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &c| acc * self.m + (c - 1))
    }
}

pub fn build_lattice(d: usize, m: usize) -> Result<Lattice> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidParam(format!(
            "lattice needs d >= 1 and m >= 1, got d={d}, m={m}"
        )));
    }
    let n = m
        .checked_pow(d as u32)
        .filter(|&n| n <= 1 << 20)
        .ok_or_else(|| Error::InvalidParam(format!("lattice [1,{m}]^{d} is too large")))?;

    let sites: Vec<Vec<usize>> = (0..n)
        .map(|mut idx| {
            let mut multi = vec![0; d];
            for slot in multi.iter_mut().rev() {
                *slot = idx % m + 1;
                idx /= m;
            }
            multi
        })
        .collect();

    let mut lat = Lattice {
        d,
        m,
        sites,
        edges: Vec::new(),
    };
    if m == 1 {
        return Ok(lat);
    }
    // one forward step per site and direction; m = 2 produces the doubled pairs
    let mut edges = Vec::with_capacity(n * d);
    for j in 0..n {
        for dir in 0..d {
            let mut nb = lat.sites[j].clone();
            nb[dir] = nb[dir] % m + 1;
            let k = lat.index_of(&nb);
            edges.push((j.min(k), j.max(k)));
        }
    }
    lat.edges = edges;
    Ok(lat)
}

/// Dense row-major graph Laplacian `A - deg`, negative semidefinite with zero row sums.
pub fn laplacian(lat: &Lattice) -> Vec<f64> {
    let n = lat.len();
    let mut lap = vec![0.0; n * n];
    for &(a, b) in &lat.edges {
        lap[a * n + b] += 1.0;
        lap[b * n + a] += 1.0;
        lap[a * n + a] -= 1.0;
        lap[b * n + b] -= 1.0;
    }
    lap
}

/// `J = (I + alpha * Laplacian) / W`, row-major `|Λ| x |Λ|`.
pub fn variance_profile(lat: &Lattice, alpha: f64, w: usize) -> Result<Vec<f64>> {
    let limit = 1.0 / (4.0 * lat.d as f64);
    if !(alpha >= 0.0 && alpha < limit) {
        return Err(Error::InvalidParam(format!(
            "alpha must lie in [0, {limit}), got {alpha}"
        )));
    }
    if w == 0 {
        return Err(Error::InvalidParam("block size W must be positive".into()));
    }
    let n = lat.len();
    let mut j = laplacian(lat);
    for (idx, v) in j.iter_mut().enumerate() {
        let diag = if idx / n == idx % n { 1.0 } else { 0.0 };
        *v = (diag + alpha * *v) / w as f64;
    }
    Ok(j)
}
