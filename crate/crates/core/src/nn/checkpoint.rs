//! Versioned binary checkpoint of a network and, optionally, its optimiser.
//!
//! Layout, little-endian:
//!
//! ```text
//! magic       8 bytes  "MUSCHNET"
//! version     u32      (1)
//! n_user, n_subband, max_users, n_actions, n_features,
//! d_model, n_heads, n_blocks, d_ff, head_hidden        u32 × 10
//! positional  u8       (0 | 1)
//! n_tensors   u32
//! per tensor, in NetworkShape::tensor_specs order:
//!   name_len u16, name bytes (UTF-8), rows u32, cols u32, rows·cols × f64
//! has_adam    u8       (0 | 1)
//! if has_adam:
//!   learning_rate, beta1, beta2, epsilon   f64 × 4
//!   step                                   u64
//!   first moments, then second moments: rows·cols × f64 per tensor
//! ```
//!
//! Writing then reading reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::adam::{AdamConfig, AdamState};
use super::params::{NetworkParameters, NetworkShape};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

pub const MAGIC: &[u8; 8] = b"MUSCHNET";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParameters,
    pub adam: Option<AdamState>,
}

fn bad(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "checkpoint",
        detail: detail.into(),
    }
}

pub fn write_checkpoint<W: Write>(params: &NetworkParameters, adam: Option<&AdamState>, mut w: W) -> Result<()> {
    let s = &params.shape;
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    for d in [
        s.n_user,
        s.n_subband,
        s.max_users,
        s.n_actions,
        s.n_features,
        s.d_model,
        s.n_heads,
        s.n_blocks,
        s.d_ff,
        s.head_hidden,
    ] {
        w.write_u32::<LE>(d as u32)?;
    }
    w.write_u8(s.positional as u8)?;
    w.write_u32::<LE>(params.tensors.len() as u32)?;
    for ((name, _, _), t) in s.tensor_specs().iter().zip(&params.tensors) {
        w.write_u16::<LE>(name.len() as u16)?;
        w.write_all(name.as_bytes())?;
        w.write_u32::<LE>(t.rows as u32)?;
        w.write_u32::<LE>(t.cols as u32)?;
        for &v in &t.data {
            w.write_f64::<LE>(v)?;
        }
    }
    match adam {
        None => w.write_u8(0)?,
        Some(a) => {
            w.write_u8(1)?;
            for v in [a.config.learning_rate, a.config.beta1, a.config.beta2, a.config.epsilon] {
                w.write_f64::<LE>(v)?;
            }
            w.write_u64::<LE>(a.step)?;
            for t in a.m.iter().chain(&a.v) {
                for &v in &t.data {
                    w.write_f64::<LE>(v)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_values<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Matrix> {
    let mut data = vec![0.0; rows * cols];
    r.read_f64_into::<LE>(&mut data)?;
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 10];
    for d in dims.iter_mut() {
        *d = r.read_u32::<LE>()? as usize;
    }
    let positional = match r.read_u8()? {
        0 => false,
        1 => true,
        other => return Err(bad(format!("positional flag {other}"))),
    };
    let shape = NetworkShape {
        n_user: dims[0],
        n_subband: dims[1],
        max_users: dims[2],
        n_actions: dims[3],
        n_features: dims[4],
        d_model: dims[5],
        n_heads: dims[6],
        n_blocks: dims[7],
        d_ff: dims[8],
        head_hidden: dims[9],
        positional,
    };
    let expected = NetworkShape::new(
        shape.n_user,
        shape.n_subband,
        shape.max_users,
        &super::NetworkConfig {
            d_model: shape.d_model,
            n_heads: shape.n_heads,
            n_blocks: shape.n_blocks,
            d_ff: shape.d_ff,
            head_hidden: shape.head_hidden,
            positional_encoding: positional,
        },
    )
    .map_err(|e| bad(e.to_string()))?;
    if expected != shape {
        return Err(bad("inconsistent shape header"));
    }
    let specs = shape.tensor_specs();
    let n_tensors = r.read_u32::<LE>()? as usize;
    if n_tensors != specs.len() {
        return Err(bad(format!("{n_tensors} tensors, expected {}", specs.len())));
    }
    let mut tensors = Vec::with_capacity(n_tensors);
    for (name, rows, cols) in &specs {
        let len = r.read_u16::<LE>()? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        if buf != name.as_bytes() {
            return Err(bad(format!("expected tensor {name}, found {}", String::from_utf8_lossy(&buf))));
        }
        let (fr, fc) = (r.read_u32::<LE>()? as usize, r.read_u32::<LE>()? as usize);
        if (fr, fc) != (*rows, *cols) {
            return Err(bad(format!("{name}: {fr}x{fc}, expected {rows}x{cols}")));
        }
        tensors.push(read_values(&mut r, fr, fc)?);
    }
    let params = NetworkParameters::from_tensors(shape, tensors)?;
    let adam = match r.read_u8()? {
        0 => None,
        1 => {
            let mut c = [0.0; 4];
            for v in c.iter_mut() {
                *v = r.read_f64::<LE>()?;
            }
            let step = r.read_u64::<LE>()?;
            let mut moments = Vec::with_capacity(2 * specs.len());
            for _ in 0..2 {
                for (_, rows, cols) in &specs {
                    moments.push(read_values(&mut r, *rows, *cols)?);
                }
            }
            let v = moments.split_off(specs.len());
            Some(AdamState {
                config: AdamConfig {
                    learning_rate: c[0],
                    beta1: c[1],
                    beta2: c[2],
                    epsilon: c[3],
                },
                step,
                m: moments,
                v,
            })
        }
        other => return Err(bad(format!("optimiser flag {other}"))),
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(Checkpoint { params, adam })
}

pub fn save_checkpoint(path: &Path, params: &NetworkParameters, adam: Option<&AdamState>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_checkpoint(params, adam, BufWriter::new(file)).map_err(|e| match e {
        Error::RawIo(io) => Error::io(path, io),
        other => other,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(file)).map_err(|e| match e {
        Error::RawIo(io) => Error::io(path, io),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{train, NetworkConfig, TrainingSample};
    use crate::rng::stream;

    fn trained() -> (NetworkParameters, AdamState) {
        let shape = NetworkShape::new(3, 2, 2, &NetworkConfig {
            d_model: 8,
            ..NetworkConfig::default()
        })
        .unwrap();
        let mut p = NetworkParameters::init(shape, &mut stream(1, &[]));
        let mut adam = AdamState::new(AdamConfig::default(), &shape);
        let mut x = Matrix::zeros(shape.n_tokens(), shape.n_features);
        x.data.iter_mut().enumerate().for_each(|(i, v)| *v = (i as f64 * 0.37).sin());
        let mut policy = vec![0.0; shape.n_actions];
        policy[2] = 1.0;
        let data = vec![TrainingSample {
            features: x,
            policy,
            value: 0.4,
        }];
        train(&mut p, &mut adam, &data, 3, 1, &mut stream(2, &[])).unwrap();
        (p, adam)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (p, a) = trained();
        let mut buf = Vec::new();
        write_checkpoint(&p, Some(&a), &mut buf).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back.params, p);
        assert_eq!(back.adam.as_ref(), Some(&a));
        let mut again = Vec::new();
        write_checkpoint(&back.params, back.adam.as_ref(), &mut again).unwrap();
        assert_eq!(buf, again);

        let mut bare = Vec::new();
        write_checkpoint(&p, None, &mut bare).unwrap();
        assert_eq!(read_checkpoint(bare.as_slice()).unwrap().adam, None);
    }

    #[test]
    fn rejects_corruption() {
        let (p, _) = trained();
        let mut buf = Vec::new();
        write_checkpoint(&p, None, &mut buf).unwrap();
        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_checkpoint(bad_magic.as_slice()), Err(Error::Format { .. })));
        let mut trailing = buf.clone();
        trailing.push(0);
        assert!(read_checkpoint(trailing.as_slice()).is_err());
        assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
        let mut wrong_dims = buf.clone();
        wrong_dims[12] = 7; // n_user
        assert!(read_checkpoint(wrong_dims.as_slice()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let (p, a) = trained();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save_checkpoint(&path, &p, Some(&a)).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), Checkpoint { params: p, adam: Some(a) });
        assert!(matches!(load_checkpoint(&dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
