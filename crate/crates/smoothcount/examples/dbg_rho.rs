use num_traits::Float;
use smoothcount::DoubleDouble as Dd;

fn lagrange8(lv: &[Dd], inv_h: u32, s: Dd) -> Dd {
    let ih = inv_h as usize;
    let n = lv.len() - 1;
    let sf = s.to_f64_value();
    let seg_lo = ((sf.floor() as usize) * ih).min(n);
    let seg_hi = (seg_lo + ih).min(n);
    let hi_cap = if seg_hi >= seg_lo + 7 { seg_hi - 7 } else { n.saturating_sub(7) };
    let lo_cap = seg_lo.min(hi_cap);
    let i0 = ((sf * inv_h as f64).floor() as usize).saturating_sub(3).clamp(lo_cap, hi_cap);
    let t = s * Dd::from(inv_h as f64) - Dd::from(i0 as f64);
    let mut acc = Dd::from(0.0);
    for i in 0..8 {
        let mut w = Dd::from(1.0);
        for j in 0..8 {
            if j != i {
                w = w * (t - Dd::from(j as f64)) / Dd::from(i as f64 - j as f64);
            }
        }
        acc = acc + w * lv[i0 + i];
    }
    acc
}

fn main() {
    let inv_h = 256u32;
    let n = 17 * 256usize;
    let ih = inv_h as usize;
    let mut lv = vec![Dd::from(0.0); n + 1];
    let nodes = [-0.906179845938664, -0.5384693101056831, 0.0, 0.5384693101056831, 0.906179845938664];
    let weights = [0.23692688505618908, 0.47862867049936647, 0.5688888888888889, 0.47862867049936647, 0.23692688505618908];
    let half_h = Dd::from(1.0 / 512.0);
    for k in ih + 1..=n {
        let u = Dd::from(k as f64) / Dd::from(inv_h as f64);
        let prev = lv[k - 1];
        let mid = u - half_h;
        let mut delta = Dd::from(0.0);
        for i in 0..5 {
            let t = mid + half_h * Dd::from(nodes[i]);
            let s = t - Dd::from(1.0);
            let lns = if s <= Dd::from(1.0) { Dd::from(0.0) } else { lagrange8(&lv, inv_h, s) };
            delta = delta + Dd::from(weights[i]) * (lns - prev).exp() / t;
        }
        delta = delta * half_h;
        if !(delta < Dd::from(1.0)) {
            println!("BROKE at k={k} u={}", k as f64 / 256.0);
            break;
        }
        lv[k] = prev + (-delta).ln_1p();
        if k % 64 == 0 && k >= 10 * 256 {
            println!("u={:6.3} lnrho={:12.6} delta={:.5e}", k as f64 / 256.0, lv[k].to_f64_value(), delta.to_f64_value());
        }
    }
}
