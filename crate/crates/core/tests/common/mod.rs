#![allow(dead_code)]

use galmod::fingroup::{catalog, make_extension, CatalogParams, ExtensionData, FinGroup};
use galmod::zmodlin::RingConfig;

/// The catalog extensions exercised throughout, at `l^n = l`.
pub const CATALOG_CASES: &[(&str, &[(&str, &str)])] = &[
    ("quaternion8", &[]),
    ("dihedral8", &[]),
    ("heisenberg", &[("ell", "3")]),
    ("wreath_z4_z2", &[]),
    ("free_class2", &[("d", "2"), ("ell", "2"), ("n", "1")]),
    ("unitriangular3", &[("ell", "2"), ("n", "2")]),
];

pub fn group(name: &str, params: &[(&str, &str)]) -> FinGroup {
    let p: CatalogParams = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    catalog(name, &p).unwrap()
}

pub fn extension(name: &str, params: &[(&str, &str)]) -> ExtensionData {
    let g = group(name, params);
    make_extension(&g, RingConfig::new(g.ell(), 1).unwrap()).unwrap()
}

pub fn all_extensions() -> Vec<(String, ExtensionData)> {
    CATALOG_CASES.iter().map(|(n, p)| (n.to_string(), extension(n, p))).collect()
}

/// All homomorphisms `H -> Z/l` for `H` given by its elements in `g`, found
/// from values on a greedy generating set and checked on every product.
pub fn homs_to_z_ell(g: &FinGroup, h: &[usize], ell: u64) -> Vec<Vec<u64>> {
    let index = |x: usize| h.iter().position(|&y| y == x).unwrap();
    let mut gens: Vec<usize> = vec![];
    let mut span = vec![g.identity()];
    for &x in h {
        if span.contains(&x) {
            continue;
        }
        gens.push(x);
        let mut frontier = span.clone();
        while let Some(y) = frontier.pop() {
            for &s in &gens {
                let z = g.mul(y, s);
                if !span.contains(&z) {
                    span.push(z);
                    frontier.push(z);
                }
            }
        }
    }
    let mut out = vec![];
    let total = ell.pow(gens.len() as u32);
    'assign: for code in 0..total {
        let vals: Vec<u64> = (0..gens.len()).map(|i| code / ell.pow(i as u32) % ell).collect();
        let mut f: Vec<Option<u64>> = vec![None; h.len()];
        f[index(g.identity())] = Some(0);
        let mut frontier = vec![g.identity()];
        while let Some(y) = frontier.pop() {
            for (s, &v) in gens.iter().zip(&vals) {
                let z = g.mul(y, *s);
                let fz = (f[index(y)].unwrap() + v) % ell;
                match f[index(z)] {
                    None => {
                        f[index(z)] = Some(fz);
                        frontier.push(z);
                    }
                    Some(w) if w != fz => continue 'assign,
                    _ => {}
                }
            }
        }
        let f: Vec<u64> = f.into_iter().map(Option::unwrap).collect();
        let hom = h.iter().all(|&a| h.iter().all(|&b| f[index(g.mul(a, b))] == (f[index(a)] + f[index(b)]) % ell));
        if hom {
            out.push(f);
        }
    }
    out
}

/// `Z/2 ≀ Z/4 = F_2[Z/4] ⋊ Z/4`, element `b + 16c` for a 4-bit mask `b`.
/// Its `J` has socle ranks `[2, 3]`.
pub fn wreath_z2_z4() -> ExtensionData {
    let shift = |b: usize, c: usize| ((b << c) | (b >> (4 - c))) & 15;
    let table: Vec<Vec<usize>> = (0..64)
        .map(|x| (0..64).map(|y| ((x % 16) ^ shift(y % 16, x / 16)) + 16 * ((x / 16 + y / 16) % 4)).collect())
        .collect();
    let g = FinGroup::from_cayley_table(&table, &[1, 16], 2).unwrap();
    make_extension(&g, RingConfig::new(2, 1).unwrap()).unwrap()
}
