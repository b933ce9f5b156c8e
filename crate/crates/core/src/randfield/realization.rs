use std::io::{Read, Write};

use rand::RngExt;

use super::spec::DisorderSpec;
use crate::error::{Error, Result};
use crate::geometry::Square;
use crate::rng::site_rng;

#[derive(Clone, Debug, PartialEq)]
struct LevelTable {
    i0: i64,
    j0: i64,
    ni: usize,
    nj: usize,
    values: Vec<f64>,
}

impl LevelTable {
    fn index(&self, i: i64, j: i64) -> Option<usize> {
        let (a, b) = (i - self.i0, j - self.j0);
        if a < 0 || b < 0 || a as usize >= self.ni || b as usize >= self.nj {
            None
        } else {
            Some(b as usize * self.ni + a as usize)
        }
    }
}

/// Coefficients `omega_z^(k)` for every site whose profile reaches a region.
///
/// Random coefficients are keyed by `(seed, k, site)`, so the value at a site
/// does not depend on the region, the traversal order or the worker count.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    seed: u64,
    shift: [i64; 2],
    region: Square,
    radius: f64,
    levels: Vec<LevelTable>,
}

impl DisorderRealization {
    /// Draw a realization covering `region`.
    pub fn generate(spec: &DisorderSpec, seed: u64, region: Square) -> Result<Self> {
        Self::generate_shifted(spec, seed, region, [0, 0])
    }

    /// The translated realization `(T_a omega)_z = omega_{z - a}` for integer `a`.
    pub fn generate_shifted(
        spec: &DisorderSpec,
        seed: u64,
        region: Square,
        shift: [i64; 2],
    ) -> Result<Self> {
        Self::build(spec, seed, shift, region, |k, i, j| {
            let s = 1i64 << k;
            let (si, sj) = (i - shift[0] * s, j - shift[1] * s);
            let u: f64 = site_rng(seed, k, si, sj).random();
            spec.site_width(seed, k, si, sj) * spec.density.quantile(u)
        })
    }

    /// Same coefficient on every site of a level (a `Z^2`-periodic configuration).
    pub fn constant(spec: &DisorderSpec, region: Square, per_level: &[f64]) -> Result<Self> {
        if per_level.len() != spec.k_max as usize + 1 {
            return Err(Error::param("per_level", "one value per level is required"));
        }
        Self::build(spec, 0, [0, 0], region, |k, _, _| per_level[k as usize])
    }

    /// All coefficients at the lower (`sign < 0`) or upper envelope.
    pub fn extremal(spec: &DisorderSpec, region: Square, sign: f64) -> Result<Self> {
        let vals: Vec<f64> = (0..=spec.k_max)
            .map(|k| if sign < 0.0 { spec.m_minus(k) } else { spec.m_plus(k) })
            .collect();
        Self::constant(spec, region, &vals)
    }

    pub fn from_fn(
        spec: &DisorderSpec,
        region: Square,
        f: impl Fn(u32, i64, i64) -> f64,
    ) -> Result<Self> {
        Self::build(spec, 0, [0, 0], region, f)
    }

    fn build(
        spec: &DisorderSpec,
        seed: u64,
        shift: [i64; 2],
        region: Square,
        f: impl Fn(u32, i64, i64) -> f64,
    ) -> Result<Self> {
        if !(region.side > 0.0) || !region.side.is_finite() {
            return Err(Error::param("region.side", "must be positive and finite"));
        }
        let radius = spec.profile.support_radius();
        let (lo, hi) = (region.lo(), region.hi());
        let mut levels = Vec::with_capacity(spec.k_max as usize + 1);
        for k in 0..=spec.k_max {
            let s = (1u64 << k) as f64;
            let i0 = (lo[0] * s - radius).floor() as i64;
            let i1 = (hi[0] * s + radius).ceil() as i64;
            let j0 = (lo[1] * s - radius).floor() as i64;
            let j1 = (hi[1] * s + radius).ceil() as i64;
            let (ni, nj) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
            if ni * nj > 50_000_000 {
                return Err(Error::TooLarge { nodes: ni * nj, cap: 50_000_000 });
            }
            let mut values = Vec::with_capacity(ni * nj);
            for b in 0..nj {
                for a in 0..ni {
                    values.push(f(k, i0 + a as i64, j0 + b as i64));
                }
            }
            levels.push(LevelTable { i0, j0, ni, nj, values });
        }
        Ok(DisorderRealization { seed, shift, region, radius, levels })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shift(&self) -> [i64; 2] {
        self.shift
    }

    pub fn region(&self) -> Square {
        self.region
    }

    pub fn k_max(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    /// Whether a point lies in the realized region (closed, with a small slack).
    pub fn covers(&self, x: [f64; 2]) -> bool {
        self.region.sup_dist(x) <= self.region.half() * (1.0 + 1e-12) + 1e-12
    }

    pub fn check_point(&self, x: [f64; 2]) -> Result<()> {
        if self.covers(x) {
            Ok(())
        } else {
            Err(Error::OutOfRegion { x: x[0], y: x[1] })
        }
    }

    /// Coefficient at site `(i, j) 2^{-k}`, `None` if it was not realized.
    pub fn get(&self, k: u32, i: i64, j: i64) -> Option<f64> {
        let t = self.levels.get(k as usize)?;
        t.index(i, j).map(|idx| t.values[idx])
    }

    /// Copy with one coefficient replaced.
    pub fn with_value(&self, k: u32, i: i64, j: i64, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let t = out
            .levels
            .get_mut(k as usize)
            .ok_or_else(|| Error::param("k", "level not realized"))?;
        let idx = t
            .index(i, j)
            .ok_or_else(|| Error::param("site", "site not realized"))?;
        t.values[idx] = value;
        Ok(out)
    }

    /// Index window `[i0, i1] x [j0, j1]` stored on level `k`.
    pub fn level_window(&self, k: u32) -> ([i64; 2], [i64; 2]) {
        let t = &self.levels[k as usize];
        (
            [t.i0, t.i0 + t.ni as i64 - 1],
            [t.j0, t.j0 + t.nj as i64 - 1],
        )
    }

    /// All stored sites `(k, i, j, omega)`.
    pub fn sites(&self) -> impl Iterator<Item = (u32, i64, i64, f64)> + '_ {
        self.levels.iter().enumerate().flat_map(|(k, t)| {
            t.values.iter().enumerate().map(move |(idx, &v)| {
                let i = t.i0 + (idx % t.ni) as i64;
                let j = t.j0 + (idx / t.ni) as i64;
                (k as u32, i, j, v)
            })
        })
    }

    /// Binary table: 16-byte header (magic, version, seed) then
    /// `(k: u32, z1: f64, z2: f64, omega: f64)` records, little endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for (k, i, j, v) in self.sites() {
            let s = (1u64 << k) as f64;
            w.write_all(&k.to_le_bytes())?;
            w.write_all(&(i as f64 / s).to_le_bytes())?;
            w.write_all(&(j as f64 / s).to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

const MAGIC: &[u8; 4] = b"RMFR";
const FORMAT_VERSION: u32 = 1;

/// One record of the binary realization table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteRecord {
    pub k: u32,
    pub z: [f64; 2],
    pub omega: f64,
}

/// Read a table written by [`DisorderRealization::write_binary`]; returns the seed and records.
pub fn read_binary<R: Read>(mut r: R) -> Result<(u64, Vec<SiteRecord>)> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[0..4] != MAGIC {
        return Err(Error::Invalid("not a realization table".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Invalid(format!("unsupported table version {version}")));
    }
    let seed = u64::from_le_bytes(head[8..16].try_into().unwrap());
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 28 != 0 {
        return Err(Error::Invalid("truncated realization table".into()));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().unwrap());
    let recs = body
        .chunks_exact(28)
        .map(|c| SiteRecord {
            k: u32::from_le_bytes(c[0..4].try_into().unwrap()),
            z: [f(&c[4..12]), f(&c[12..20])],
            omega: f(&c[20..28]),
        })
        .collect();
    Ok((seed, recs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_independent_of_region() {
        let spec = DisorderSpec::example();
        let a = DisorderRealization::generate(&spec, 11, Square::new([0.0, 0.0], 4.0)).unwrap();
        let b = DisorderRealization::generate(&spec, 11, Square::new([1.0, -0.5], 6.0)).unwrap();
        for (k, i, j, v) in a.sites() {
            if let Some(w) = b.get(k, i, j) {
                assert_eq!(v, w);
            }
        }
        let c = DisorderRealization::generate(&spec, 12, Square::new([0.0, 0.0], 4.0)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn coefficients_stay_in_envelope() {
        let mut spec = DisorderSpec::example();
        for iid in [true, false] {
            spec.iid = iid;
            let r = DisorderRealization::generate(&spec, 3, Square::new([0.0, 0.0], 10.0)).unwrap();
            for (k, _, _, v) in r.sites() {
                assert!(v.abs() <= spec.sigma(k));
            }
        }
    }

    #[test]
    fn shift_relabels_sites() {
        let spec = DisorderSpec::example();
        let region = Square::new([0.0, 0.0], 6.0);
        let a = DisorderRealization::generate(&spec, 5, region).unwrap();
        let b = DisorderRealization::generate_shifted(&spec, 5, region, [1, -2]).unwrap();
        for (k, i, j, v) in b.sites() {
            let s = 1i64 << k;
            if let Some(w) = a.get(k, i - s, j + 2 * s) {
                assert_eq!(v, w);
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let spec = DisorderSpec::example();
        let r = DisorderRealization::generate(&spec, 99, Square::new([0.0, 0.0], 3.0)).unwrap();
        let mut buf = Vec::new();
        r.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"RMFR");
        let (seed, recs) = read_binary(&buf[..]).unwrap();
        assert_eq!(seed, 99);
        let direct: Vec<_> = r.sites().collect();
        assert_eq!(recs.len(), direct.len());
        for (rec, (k, i, j, v)) in recs.iter().zip(direct) {
            let s = (1u64 << k) as f64;
            assert_eq!(rec.k, k);
            assert_eq!(rec.z, [i as f64 / s, j as f64 / s]);
            assert_eq!(rec.omega.to_bits(), v.to_bits());
        }
        assert!(read_binary(&buf[..20]).is_err());
    }
}
