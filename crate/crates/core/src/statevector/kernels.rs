//! Hot loops of the trajectory engine. Each has a plain body and, on x86-64,
//! an AVX2/FMA build of the same body chosen at runtime.

use num_complex::Complex64;

fn as_f64(amps: &mut [Complex64]) -> &mut [f64] {
    // SAFETY: Complex64 is repr(C) with two f64 fields and no padding.
    unsafe { std::slice::from_raw_parts_mut(amps.as_mut_ptr().cast::<f64>(), amps.len() * 2) }
}

/// Rotates interleaved (re, im) lanes `lo`, `hi` of equal even length.
#[inline(always)]
fn rx_lanes(lo: &mut [f64], hi: &mut [f64], c: f64, s: f64) {
    if lo.len() >= 4 {
        for (x, y) in lo.chunks_exact_mut(4).zip(hi.chunks_exact_mut(4)) {
            let a = [x[0], x[1], x[2], x[3]];
            let b = [y[0], y[1], y[2], y[3]];
            x[0] = c * a[0] + s * b[1];
            x[1] = c * a[1] - s * b[0];
            x[2] = c * a[2] + s * b[3];
            x[3] = c * a[3] - s * b[2];
            y[0] = c * b[0] + s * a[1];
            y[1] = c * b[1] - s * a[0];
            y[2] = c * b[2] + s * a[3];
            y[3] = c * b[3] - s * a[2];
        }
    } else {
        let (a, b) = ([lo[0], lo[1]], [hi[0], hi[1]]);
        lo[0] = c * a[0] + s * b[1];
        lo[1] = c * a[1] - s * b[0];
        hi[0] = c * b[0] + s * a[1];
        hi[1] = c * b[1] - s * a[0];
    }
}

#[inline(always)]
fn rx_body(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    let flat = as_f64(amps);
    let stride = 2usize << q;
    if q == 0 {
        // Pairs are adjacent: one block of 4 lanes holds both amplitudes.
        for x in flat.chunks_exact_mut(4) {
            let a = [x[0], x[1], x[2], x[3]];
            x[0] = c * a[0] + s * a[3];
            x[1] = c * a[1] - s * a[2];
            x[2] = c * a[2] + s * a[1];
            x[3] = c * a[3] - s * a[0];
        }
        return;
    }
    for block in flat.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        rx_lanes(lo, hi, c, s);
    }
}

/// Block size (log2 amplitudes) kept in L1 while low-qubit rotations run.
const BLOCK_BITS: usize = 11;

#[inline(always)]
fn rx_layer_body(amps: &mut [Complex64], rots: &[(usize, f64, f64)]) {
    let block = BLOCK_BITS.min(amps.len().trailing_zeros() as usize);
    for chunk in amps.chunks_exact_mut(1 << block) {
        for &(q, c, s) in rots.iter().filter(|r| r.0 < block) {
            rx_body(chunk, q, c, s);
        }
    }
    for &(q, c, s) in rots.iter().filter(|r| r.0 >= block) {
        rx_body(amps, q, c, s);
    }
}

#[inline(always)]
fn gather_mul_body(amps: &mut [Complex64], class_of: &[u32], factors: &[Complex64]) {
    for (a, &c) in amps.iter_mut().zip(class_of) {
        *a *= factors[c as usize];
    }
}

#[inline(always)]
fn class_weights_body(amps: &[Complex64], class_of: &[u32], out: &mut [f64]) {
    for (a, &c) in amps.iter().zip(class_of) {
        out[c as usize] += a.norm_sqr();
    }
}

#[inline(always)]
fn lane_sum(xs: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let chunks = xs.chunks_exact(8);
    let tail: f64 = chunks.remainder().iter().sum();
    for c in chunks {
        for (a, x) in acc.iter_mut().zip(c) {
            *a += x;
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Excited-state probability of every qubit. Folds the top qubit away after reading it.
#[inline(always)]
fn excited_populations_body(amps: &[Complex64], norms: &mut Vec<f64>, out: &mut [f64]) {
    norms.clear();
    norms.extend(amps.iter().map(|a| a.norm_sqr()));
    let mut len = norms.len();
    for slot in out.iter_mut().rev() {
        let half = len / 2;
        let (lo, hi) = norms[..len].split_at_mut(half);
        *slot = lane_sum(hi);
        for (l, h) in lo.iter_mut().zip(hi.iter()) {
            *l += h;
        }
        len = half;
    }
}

/// σ⁻ on `q` followed by multiplication with `scale`.
#[inline(always)]
fn lower_body(amps: &mut [Complex64], q: usize, scale: f64) {
    let stride = 1usize << q;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            *a0 = *a1 * scale;
            *a1 = Complex64::new(0.0, 0.0);
        }
    }
}

/// Multiplies by `factors[class]` times the product table `lo[k mod 2^split] · hi[k >> split]`.
#[inline(always)]
fn gather_mul_split_body(amps: &mut [Complex64], class_of: &[u32], factors: &[Complex64], split: usize, lo: &[Complex64], hi: &[Complex64]) {
    let width = 1usize << split;
    for ((chunk, classes), h) in amps.chunks_exact_mut(width).zip(class_of.chunks_exact(width)).zip(hi) {
        for ((a, &c), l) in chunk.iter_mut().zip(classes).zip(lo) {
            *a *= factors[c as usize] * (l * h);
        }
    }
}

#[cfg(target_arch = "x86_64")]
mod avx {
    use super::*;
    use std::arch::x86_64::*;

    #[target_feature(enable = "avx2,fma")]
    unsafe fn rx(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
        let p = amps.as_mut_ptr().cast::<f64>();
        let len = amps.len() * 2;
        let cv = _mm256_set1_pd(c);
        let sv = _mm256_setr_pd(s, -s, s, -s);
        // SAFETY (all loads and stores): offsets stay below `len`, the f64 view of `amps`.
        unsafe {
            if q == 0 {
                // [lo.re, lo.im, hi.re, hi.im] → partner lanes [hi.im, hi.re, lo.im, lo.re].
                let mut i = 0;
                while i < len {
                    let x = _mm256_loadu_pd(p.add(i));
                    let w = _mm256_permute4x64_pd::<0b00_01_10_11>(x);
                    _mm256_storeu_pd(p.add(i), _mm256_fmadd_pd(sv, w, _mm256_mul_pd(cv, x)));
                    i += 4;
                }
                return;
            }
            let stride = 2usize << q;
            let mut base = 0;
            while base < len {
                let mut i = base;
                while i < base + stride {
                    let x = _mm256_loadu_pd(p.add(i));
                    let y = _mm256_loadu_pd(p.add(i + stride));
                    let xs = _mm256_permute_pd::<0b0101>(x);
                    let ys = _mm256_permute_pd::<0b0101>(y);
                    _mm256_storeu_pd(p.add(i), _mm256_fmadd_pd(sv, ys, _mm256_mul_pd(cv, x)));
                    _mm256_storeu_pd(p.add(i + stride), _mm256_fmadd_pd(sv, xs, _mm256_mul_pd(cv, y)));
                    i += 4;
                }
                base += stride << 1;
            }
        }
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn rx_layer(amps: &mut [Complex64], rots: &[(usize, f64, f64)]) {
        let block = BLOCK_BITS.min(amps.len().trailing_zeros() as usize);
        // SAFETY: callers checked the CPU features.
        unsafe {
            for chunk in amps.chunks_exact_mut(1 << block) {
                for &(q, c, s) in rots.iter().filter(|r| r.0 < block) {
                    rx(chunk, q, c, s);
                }
            }
            for &(q, c, s) in rots.iter().filter(|r| r.0 >= block) {
                rx(amps, q, c, s);
            }
        }
    }
}

fn has_avx2() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

pub(crate) fn apply_rx(amps: &mut [Complex64], q: usize, c: f64, s: f64) {
    apply_rx_layer(amps, &[(q, c, s)]);
}

pub(crate) fn apply_rx_layer(amps: &mut [Complex64], rots: &[(usize, f64, f64)]) {
    if has_avx2() {
        #[cfg(target_arch = "x86_64")]
        // SAFETY: the required CPU features were just detected.
        return unsafe { avx::rx_layer(amps, rots) };
    }
    rx_layer_body(amps, rots)
}

macro_rules! dispatch {
    ($name:ident, $avx:ident, $body:ident, ($($arg:ident : $ty:ty),*)) => {
        #[cfg(target_arch = "x86_64")]
        #[target_feature(enable = "avx2,fma")]
        unsafe fn $avx($($arg: $ty),*) {
            $body($($arg),*)
        }

        pub(crate) fn $name($($arg: $ty),*) {
            #[cfg(target_arch = "x86_64")]
            {
                if has_avx2() {
                    // SAFETY: the required CPU features were just detected.
                    return unsafe { $avx($($arg),*) };
                }
            }
            $body($($arg),*)
        }
    };
}

dispatch!(gather_mul, gather_mul_avx2, gather_mul_body, (amps: &mut [Complex64], class_of: &[u32], factors: &[Complex64]));
dispatch!(excited_populations, excited_populations_avx2, excited_populations_body, (amps: &[Complex64], norms: &mut Vec<f64>, out: &mut [f64]));
dispatch!(lower, lower_avx2, lower_body, (amps: &mut [Complex64], q: usize, scale: f64));
dispatch!(
    gather_mul_split,
    gather_mul_split_avx2,
    gather_mul_split_body,
    (amps: &mut [Complex64], class_of: &[u32], factors: &[Complex64], split: usize, lo: &[Complex64], hi: &[Complex64])
);
dispatch!(class_weights, class_weights_avx2, class_weights_body, (amps: &[Complex64], class_of: &[u32], out: &mut [f64]));
