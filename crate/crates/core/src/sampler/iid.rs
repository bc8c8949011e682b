use super::rng::{check_open_unit, RngStream};
use crate::model::{digit_tail, DistributionSpec, GoodSequence};
use crate::{Error, Result};

/// Map a uniform variate to the atom index `s` of `X`, i.e. the smallest `s`
/// with `F(1/λ_s) < u`.
///
/// The closed form `s = j_{1/F⁻¹(u)}` is computed first and then nudged by at
/// most one step in each direction so inexact inverses still honour the
/// defining inequality `F(1/λ_s) < u ≤ F(1/λ_{s−1})`.
pub fn atom_from_uniform(u: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<u64> {
    let u = check_open_unit(u)?;
    let v = dist.inverse(u);
    if v <= 0.0 {
        return Err(Error::Resample);
    }
    let mut s = seq.index_above(1.0 / v)?;
    if digit_tail(s, dist, seq) >= u {
        s += 1;
    } else if s > 1 && u > digit_tail(s - 1, dist, seq) {
        s -= 1;
    }
    Ok(s)
}

/// `X = λ_s` for the atom selected by `u`.
pub fn x_from_uniform(u: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    Ok(seq.lambda(atom_from_uniform(u, dist, seq)?))
}

/// Fill `out` with independent draws of `X`, `P(X = λ_s) = F(1/λ_{s−1}) − F(1/λ_s)`.
pub fn fill_iid_x(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    rng: &mut RngStream,
    out: &mut [f64],
) -> Result<()> {
    for slot in out.iter_mut() {
        *slot = loop {
            match x_from_uniform(rng.uniform_open(), dist, seq) {
                Err(Error::Resample) => continue,
                other => break other?,
            }
        };
    }
    Ok(())
}

pub fn sample_iid_x(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::input("sample_iid_x needs n >= 1"));
    }
    let mut out = vec![0.0; n];
    fill_iid_x(dist, seq, rng, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::digit_mass;

    #[test]
    fn inversion_examples() {
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        assert_eq!(x_from_uniform(0.3, &id, &ints).unwrap(), 4.0);
        assert_eq!(x_from_uniform(0.999, &id, &ints).unwrap(), 2.0);
        assert!(matches!(x_from_uniform(0.0, &id, &ints), Err(Error::Resample)));
        assert!(matches!(x_from_uniform(1.0, &id, &ints), Err(Error::Resample)));
    }

    #[test]
    fn inversion_respects_the_defining_inequality() {
        let dists = [
            DistributionSpec::identity(),
            DistributionSpec::quadratic(),
            DistributionSpec::polynomial(&[0.3, 0.7]).unwrap(),
        ];
        let seqs = [GoodSequence::integers(), GoodSequence::scaled(2).unwrap()];
        let mut rng = RngStream::new(5, 0);
        for dist in &dists {
            for seq in &seqs {
                for _ in 0..20_000 {
                    let u = rng.uniform_open();
                    let s = atom_from_uniform(u, dist, seq).unwrap();
                    assert!(digit_tail(s, dist, seq) < u);
                    assert!(s == 0 || u <= digit_tail(s - 1, dist, seq));
                }
            }
        }
    }

    #[test]
    fn exceedance_frequency_matches_tail() {
        // 1{X > t} has mean F(1/λ_{j_t − 1}).
        let id = DistributionSpec::identity();
        let seq = GoodSequence::scaled(2).unwrap();
        let mut rng = RngStream::new(11, 3);
        let n = 100_000;
        let xs = sample_iid_x(&id, &seq, n, &mut rng).unwrap();
        let t = 7.0;
        let j_t = seq.index_above(t).unwrap();
        let p = digit_tail(j_t - 1, &id, &seq);
        let freq = xs.iter().filter(|&&x| x > t).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se, "freq {freq} vs {p}");
        let p2 = digit_mass(1, &id, &seq).unwrap();
        let f2 = xs.iter().filter(|&&x| x == 2.0).count() as f64 / n as f64;
        assert!((f2 - p2).abs() <= 4.0 * (p2 * (1.0 - p2) / n as f64).sqrt());
    }

    #[test]
    fn draws_are_deterministic() {
        let id = DistributionSpec::quadratic();
        let ints = GoodSequence::integers();
        let a = sample_iid_x(&id, &ints, 500, &mut RngStream::new(9, 1)).unwrap();
        let b = sample_iid_x(&id, &ints, 500, &mut RngStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
    }
}
