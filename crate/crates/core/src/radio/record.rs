//! Versioned binary record of an [`EnvironmentState`] for replay.
//!
//! Layout, little-endian:
//!
//! ```text
//! magic      8 bytes  "MUENVREC"
//! version    u32      (1)
//! phy_len    u32      length of the JSON-encoded ChannelConfig
//! phy        phy_len bytes
//! n_user, n_subband, n_rx, n_tx   u32 × 4
//! noise_variance                  f64
//! full_buffer_bits                u64
//! positions  n_user × (distance_m f64, azimuth_rad f64)
//! h_true     n_user·n_subband·n_rx·n_tx × (re f64, im f64)
//! h_est      same layout as h_true
//! buffers    n_user × u64
//! avg_rates  n_user × f64
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::{BufferState, ChannelConfig, ChannelTensor, EnvironmentState, UserPosition};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"MUENVREC";
pub const VERSION: u32 = 1;

fn bad(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "environment record",
        detail: detail.into(),
    }
}

pub fn write_environment<W: Write>(env: &EnvironmentState, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    let phy = serde_json::to_vec(&env.phy).map_err(|e| bad(e.to_string()))?;
    w.write_u32::<LE>(phy.len() as u32)?;
    w.write_all(&phy)?;
    let (nu, ns, nr, nt) = env.h_true.shape();
    for d in [nu, ns, nr, nt] {
        w.write_u32::<LE>(d as u32)?;
    }
    w.write_f64::<LE>(env.noise_variance)?;
    w.write_u64::<LE>(env.full_buffer_bits)?;
    for p in &env.positions {
        w.write_f64::<LE>(p.distance_m)?;
        w.write_f64::<LE>(p.azimuth_rad)?;
    }
    for h in [&env.h_true, &env.h_est] {
        for c in &h.data {
            w.write_f64::<LE>(c.re)?;
            w.write_f64::<LE>(c.im)?;
        }
    }
    for &b in &env.buffers.n_bits {
        w.write_u64::<LE>(b)?;
    }
    for &r in &env.avg_rates {
        w.write_f64::<LE>(r)?;
    }
    Ok(())
}

pub fn read_environment<R: Read>(mut r: R) -> Result<EnvironmentState> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let phy_len = r.read_u32::<LE>()? as usize;
    let mut phy = vec![0u8; phy_len];
    r.read_exact(&mut phy)?;
    let phy: ChannelConfig = serde_json::from_slice(&phy).map_err(|e| bad(e.to_string()))?;
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        *d = r.read_u32::<LE>()? as usize;
    }
    let [nu, ns, nr, nt] = dims;
    if nu == 0 || ns == 0 || nr == 0 || nt == 0 || nu * ns * nr * nt > 1 << 28 {
        return Err(bad(format!("implausible shape {dims:?}")));
    }
    let noise_variance = r.read_f64::<LE>()?;
    let full_buffer_bits = r.read_u64::<LE>()?;
    let positions = (0..nu)
        .map(|_| {
            Ok(UserPosition {
                distance_m: r.read_f64::<LE>()?,
                azimuth_rad: r.read_f64::<LE>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let read_tensor = |r: &mut R| -> Result<ChannelTensor> {
        let mut t = ChannelTensor::zeros(nu, ns, nr, nt);
        for c in t.data.iter_mut() {
            *c = Complex64::new(r.read_f64::<LE>()?, r.read_f64::<LE>()?);
        }
        Ok(t)
    };
    let h_true = read_tensor(&mut r)?;
    let h_est = read_tensor(&mut r)?;
    let n_bits = (0..nu).map(|_| r.read_u64::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
    let avg_rates = (0..nu).map(|_| r.read_f64::<LE>()).collect::<std::io::Result<Vec<_>>>()?;
    Ok(EnvironmentState {
        positions,
        h_true,
        h_est,
        buffers: BufferState { n_bits },
        avg_rates,
        phy,
        noise_variance,
        full_buffer_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{sample_environment, EnvironmentConfig, ImpairmentConfig};
    use crate::rng::stream;

    #[test]
    fn round_trip_is_exact() {
        let cfg = EnvironmentConfig {
            impairments: ImpairmentConfig {
                snr_ce_db: Some(0.0),
                full_buffer: false,
                ..ImpairmentConfig::default()
            },
            ..EnvironmentConfig::default()
        };
        let env = sample_environment(&cfg, 123_456, &mut stream(11, &[])).unwrap();
        let mut buf = Vec::new();
        write_environment(&env, &mut buf).unwrap();
        let back = read_environment(buf.as_slice()).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn rejects_bad_magic() {
        let err = read_environment(&b"NOTANENV\x01\0\0\0"[..]).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }
}
