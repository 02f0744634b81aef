/// Points `lo, lo + h, ...` up to `hi`, with `hi` appended when the steps miss it.
pub fn axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    if hi < lo - 1e-12 {
        return Vec::new();
    }
    let span = (hi - lo).max(0.0);
    let n = (span / h + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    let last = pts[n];
    if hi - last > 1e-9 * h {
        pts.push(hi);
    } else {
        pts[n] = hi;
    }
    pts
}

/// `{(a1, a2) : a1 in [lo, hi], 0 <= a2 <= min(a1, 1 - a1)}`.
pub fn mesh_pairs(lo: f64, hi: f64, h: f64) -> Vec<[f64; 2]> {
    axis(lo, hi, h)
        .into_iter()
        .flat_map(|a1| {
            axis(0.0, a1.min(1.0 - a1), h)
                .into_iter()
                .map(move |a2| [a1, a2])
        })
        .collect()
}

/// `{(a1, a2, a3) : a3 <= a2 <= a1 <= hi, a1 + a2 + a3 >= 1, a1 + a2 <= 1}`.
pub fn mesh_triples(hi: f64, h: f64) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for a1 in axis(0.0, hi, h) {
        for a2 in axis(0.0, a1.min(1.0 - a1), h) {
            let lo3 = 1.0 - a1 - a2;
            if lo3 > a2 + 1e-12 {
                continue;
            }
            for a3 in axis(lo3.max(0.0), a2, h) {
                out.push([a1, a2, a3]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_endpoints() {
        assert_eq!(axis(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(axis(0.0, 0.6, 0.25), vec![0.0, 0.25, 0.5, 0.6]);
        assert_eq!(axis(0.3, 0.3, 0.1), vec![0.3]);
        assert!(axis(0.5, 0.4, 0.1).is_empty());
    }

    #[test]
    fn pair_count_matches_closed_form() {
        // a1 = i/K for i in [0.3K, 0.7K], a2 = j/K for j <= min(i, K - i)
        let k = 2000u64;
        let want: u64 = (600..=1400).map(|i: u64| i.min(k - i) + 1).sum();
        assert_eq!(mesh_pairs(0.3, 0.7, 1.0 / k as f64).len() as u64, want);
    }

    #[test]
    fn triple_count_matches_closed_form() {
        let k: i64 = 500;
        let mut want = 0;
        for i in 0..=350 {
            for j in 0..=i.min(k - i) {
                let lo = (k - i - j).max(0);
                if lo <= j {
                    want += j - lo + 1;
                }
            }
        }
        assert_eq!(mesh_triples(0.7, 1.0 / k as f64).len() as i64, want);
    }
}
