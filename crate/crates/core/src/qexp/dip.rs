//! Hartigan's dip statistic for unimodality.
//!
//! Follows the classic greatest-convex-minorant / least-concave-majorant
//! cycling algorithm, with the known index fix in the minorant branch and
//! the termination guard on an unchanged modal interval. Internally works
//! in units of `2n * dip`, so the minimum is `1/(2n)`.

/// Dip of an unsorted sample. Returns `None` for an empty sample or one
/// containing NaN.
pub fn dip_statistic(sample: &[f64]) -> Option<f64> {
    if sample.is_empty() || sample.iter().any(|x| x.is_nan()) {
        return None;
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    Some(dip_sorted(&x))
}

/// Dip of a sorted sample.
pub fn dip_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    // one-based copy keeps the index arithmetic of the algorithm intact
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    x.extend_from_slice(xs);

    let mut dip = 1.0;
    if n < 2 || x[n] == x[1] {
        return dip / (2 * n.max(1)) as f64;
    }

    let mut mn = vec![0usize; n + 1];
    let mut mj = vec![0usize; n + 1];
    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];

    // indices for the convex minorant
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (x[j] - x[mnj]) * ((mnj - mnmnj) as f64) < (x[mnj] - x[mnmnj]) * ((j - mnj) as f64)
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }

    // indices for the concave majorant
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (x[k] - x[mjk]) * (mjk as f64 - mjmjk as f64)
                    < (x[mjk] - x[mjmjk]) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut low = 1usize;
    let mut high = n;
    loop {
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        let mut d = 0.0;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (x[lcmiv] - x[gcmi1]) * (gcmix - gcmi1) as f64 / (x[gcmix] - x[gcmi1]);
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x[gcmix] - x[lcmiv1]) * (lcmiv - lcmiv1) as f64
                        / (x[lcmiv] - x[lcmiv1])
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                if ix < 1 {
                    ix = 1;
                }
                if iv > l_lcm {
                    iv = l_lcm;
                }
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        let mut dip_l: f64 = 0.0;
        for j in ig..l_gcm {
            let mut max_t: f64 = 1.0;
            let jb = gcm[j + 1];
            let je = gcm[j];
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (x[jj] - x[jb]) * c;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }

        let mut dip_u: f64 = 0.0;
        for j in ih..l_lcm {
            let mut max_t: f64 = 1.0;
            let jb = lcm[j];
            let je = lcm[j + 1];
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    let t = (x[jj] - x[jb]) * c - (jj as f64 - jb as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }

        dip = dip.max(dip_u.max(dip_l));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / (2 * n) as f64
}

/// Threshold on `sqrt(n) * dip` above which a sample is called bimodal;
/// exceeds the 99th percentile of the uniform null for large n.
pub const DIP_BIMODAL_THRESHOLD: f64 = 0.6;

pub fn is_bimodal(sample: &[f64]) -> bool {
    dip_statistic(sample).is_some_and(|d| d * (sample.len() as f64).sqrt() > DIP_BIMODAL_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evenly_spaced_is_minimal() {
        let x: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let d = dip_statistic(&x).unwrap();
        assert!((d - 1.0 / 400.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn two_equal_clusters_quarter() {
        let mut x: Vec<f64> = (0..500).map(|i| i as f64 * 1e-4).collect();
        x.extend((0..500).map(|i| 10.0 + i as f64 * 1e-4));
        let d = dip_statistic(&x).unwrap();
        assert!((d - 0.25).abs() < 0.01, "{d}");
        assert!(is_bimodal(&x));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(dip_statistic(&[]), None);
        assert_eq!(dip_statistic(&[1.0, f64::NAN]), None);
        assert_eq!(dip_statistic(&[3.0, 3.0, 3.0]), Some(1.0 / 6.0));
    }
}
