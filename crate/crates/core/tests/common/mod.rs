//! Independent oracles shared by the integration tests. Nothing here calls
//! the dynamic programs under test.
#![allow(dead_code)]

use std::path::PathBuf;

use phylokit::dna::Nucleotide;
use phylokit::pairhmm::PairHmmParams;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Alignments of a length-2 and a length-3 sequence with their monomials;
/// `i j` are the letters of the first sequence, `k l m` of the second.
pub const TABLE2: [(&str, &str); 25] = [
    ("IIIDD", "tIk sII tIl sII tIm sID tDi sDD tDj"),
    ("IIDID", "tIk sII tIl sID tDi sDI tIm sID tDj"),
    ("IIDDI", "tIk sII tIl sID tDi sDD tDj sDI tIm"),
    ("IDIID", "tIk sID tDi sDI tIl sII tIm sID tDj"),
    ("IDIDI", "tIk sID tDi sDI tIl sID tDj sDI tIm"),
    ("IDDII", "tIk sID tDi sDD tDj sDI tIl sII tIm"),
    ("DIIID", "tDi sDI tIk sII tIl sII tIm sID tDj"),
    ("DIIDI", "tDi sDI tIk sII tIl sID tDj sDI tIm"),
    ("DIDII", "tDi sDI tIk sID tDj sDI tIl sII tIm"),
    ("DDIII", "tDi sDD tDj sDI tIk sII tIl sII tIm"),
    ("MIID", "tMik sMI tIl sII tIm sID tDj"),
    ("MIDI", "tMik sMI tIl sID tDj sDI tIm"),
    ("MDII", "tMik sMD tDj sDI tIl sII tIm"),
    ("IMID", "tIk sIM tMil sMI tIm sID tDj"),
    ("IMDI", "tIk sIM tMil sMD tDj sDI tIm"),
    ("IIMD", "tIk sII tIl sIM tMim sMD tDj"),
    ("IIDM", "tIk sII tIl sID tDi sDM tMjm"),
    ("IDMI", "tIk sID tDi sDM tMjl sMI tIm"),
    ("IDIM", "tIk sID tDi sDI tIl sIM tMjm"),
    ("DMII", "tDi sDM tMjk sMI tIl sII tIm"),
    ("DIMI", "tDi sDI tIk sIM tMjl sMI tIm"),
    ("DIIM", "tDi sDI tIk sII tIl sIM tMjm"),
    ("MMI", "tMik sMM tMjl sMI tIm"),
    ("MIM", "tMik sMI tIl sIM tMjm"),
    ("IMM", "tIk sIM tMil sMM tMjm"),
];

fn state(c: char) -> usize {
    match c {
        'M' => 0,
        'I' => 1,
        'D' => 2,
        _ => panic!("bad state {c}"),
    }
}

/// Evaluate one printed monomial for `s1 = ij`, `s2 = klm`.
pub fn table2_monomial(monomial: &str, p: &PairHmmParams, s1: &[Nucleotide], s2: &[Nucleotide]) -> f64 {
    let letter = |c: char| match c {
        'i' => s1[0].index(),
        'j' => s1[1].index(),
        'k' => s2[0].index(),
        'l' => s2[1].index(),
        'm' => s2[2].index(),
        _ => panic!("bad letter {c}"),
    };
    monomial
        .split_whitespace()
        .map(|tok| {
            let c: Vec<char> = tok.chars().collect();
            match (c[0], c[1]) {
                ('s', _) => p.transitions[state(c[1])][state(c[2])],
                ('t', 'M') => p.match_emission[letter(c[2])][letter(c[3])],
                ('t', 'I') => p.insert_emission[letter(c[2])],
                ('t', 'D') => p.delete_emission[letter(c[2])],
                _ => panic!("bad token {tok}"),
            }
        })
        .product()
}

/// Visit every word over `{M, I, D}` with `#M + #D = n`, `#M + #I = m`,
/// in lexicographic order with `D < I < M`.
pub fn for_each_alignment(n: usize, m: usize, f: &mut dyn FnMut(&str)) {
    fn go(i: usize, j: usize, n: usize, m: usize, cur: &mut String, f: &mut dyn FnMut(&str)) {
        if i == n && j == m {
            f(cur);
            return;
        }
        for (c, di, dj) in [('D', 1, 0), ('I', 0, 1), ('M', 1, 1)] {
            if i + di <= n && j + dj <= m {
                cur.push(c);
                go(i + di, j + dj, n, m, cur, f);
                cur.pop();
            }
        }
    }
    go(0, 0, n, m, &mut String::new(), f);
}

pub fn all_alignments(n: usize, m: usize) -> Vec<String> {
    let mut out = Vec::new();
    for_each_alignment(n, m, &mut |w| out.push(w.to_string()));
    out
}

/// Log of an alignment monomial, summed term by term in word order.
pub fn alignment_log_monomial(word: &str, p: &PairHmmParams, s1: &[Nucleotide], s2: &[Nucleotide]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut prev: Option<usize> = None;
    let mut value = 0.0;
    for c in word.chars() {
        let s = state(c);
        if let Some(q) = prev {
            value += p.transitions[q][s].ln();
        }
        value += match c {
            'M' => p.match_emission[s1[i].index()][s2[j].index()],
            'I' => p.insert_emission[s2[j].index()],
            _ => p.delete_emission[s1[i].index()],
        }
        .ln();
        match c {
            'M' => {
                i += 1;
                j += 1
            }
            'I' => j += 1,
            _ => i += 1,
        }
        prev = Some(s);
    }
    value
}

/// Monomial of an alignment word, in probability space.
pub fn alignment_monomial(word: &str, p: &PairHmmParams, s1: &[Nucleotide], s2: &[Nucleotide]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut prev: Option<usize> = None;
    let mut value = 1.0;
    for c in word.chars() {
        let s = state(c);
        if let Some(q) = prev {
            value *= p.transitions[q][s];
        }
        value *= match c {
            'M' => p.match_emission[s1[i].index()][s2[j].index()],
            'I' => p.insert_emission[s2[j].index()],
            _ => p.delete_emission[s1[i].index()],
        };
        match c {
            'M' => {
                i += 1;
                j += 1
            }
            'I' => j += 1,
            _ => i += 1,
        }
        prev = Some(s);
    }
    value
}

/// `(#mismatch, #indel)` of an alignment word.
pub fn word_point(word: &str, s1: &[Nucleotide], s2: &[Nucleotide]) -> (i64, i64) {
    let (mut i, mut j, mut x, mut y) = (0, 0, 0, 0);
    for c in word.chars() {
        match c {
            'M' => {
                x += i64::from(s1[i] != s2[j]);
                i += 1;
                j += 1;
            }
            'I' => {
                y += 1;
                j += 1
            }
            _ => {
                y += 1;
                i += 1
            }
        }
    }
    (x, y)
}

/// Convex hull by gift wrapping, counter-clockwise from the lexicographically
/// smallest point, collinear points dropped.
pub fn gift_wrap(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
    };
    let dist = |a: (i64, i64), b: (i64, i64)| ((a.0 - b.0) as i128).pow(2) + ((a.1 - b.1) as i128).pow(2);
    let start = pts[0];
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = if pts[0] == current { pts[1] } else { pts[0] };
        for &p in &pts {
            if p == current {
                continue;
            }
            let c = cross(current, next, p);
            // clockwise of the candidate, or farther along the same ray
            if c < 0 || (c == 0 && dist(current, p) > dist(current, next)) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        current = next;
    }
    // all points collinear: keep the two ends
    if hull.len() > 2 && (2..hull.len()).all(|i| cross(hull[0], hull[1], hull[i]) == 0) {
        let far = *hull.iter().max_by_key(|&&p| dist(start, p)).unwrap();
        return vec![start, far];
    }
    hull
}

pub fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_pair_params<R: Rng>(rng: &mut R) -> PairHmmParams {
    let mut p = PairHmmParams::uniform(0.0);
    for row in p.transitions.iter_mut() {
        row.copy_from_slice(&random_simplex(rng, 3));
    }
    let m = random_simplex(rng, 16);
    for a in 0..4 {
        for b in 0..4 {
            p.match_emission[a][b] = m[4 * a + b];
        }
    }
    p.insert_emission.copy_from_slice(&random_simplex(rng, 4));
    p.delete_emission.copy_from_slice(&random_simplex(rng, 4));
    p
}

pub fn random_dna<R: Rng>(rng: &mut R, len: usize) -> String {
    (0..len).map(|_| ['A', 'C', 'G', 'T'][rng.gen_range(0..4)]).collect()
}

pub fn nts(s: &str) -> Vec<Nucleotide> {
    s.chars().map(|c| Nucleotide::from_char(c).unwrap()).collect()
}

/// Every hidden path of length `n` over `k` states, in lexicographic order.
pub fn all_paths(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out
}

/// `init · Π emission · Π transition` for one path.
pub fn path_monomial(init: &[f64], s: &[Vec<f64>], t: &[Vec<f64>], sigma: &[usize], path: &[usize]) -> f64 {
    let mut v = init[path[0]] * t[path[0]][sigma[0]];
    for i in 1..sigma.len() {
        v *= s[path[i - 1]][path[i]] * t[path[i]][sigma[i]];
    }
    v
}

pub fn random_stochastic<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| random_simplex(rng, cols)).collect()
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i:02}")).collect()
}
