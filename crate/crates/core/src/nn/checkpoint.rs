//! Binary network checkpoints.
//!
//! Layout, all integers and floats little-endian:
//! `b"RISMLP"`, version byte, hidden activation byte, output activation
//! byte, layer-size count `u64`, each layer size `u64`, then for every layer
//! in order its row-major weights followed by its biases as `f64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::nn::mlp::{Activation, Dense, Mlp};

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"RISMLP";
pub const CHECKPOINT_VERSION: u8 = 1;

pub fn write_checkpoint<W: Write>(mut out: W, net: &Mlp) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&[
        CHECKPOINT_VERSION,
        net.hidden_activation().code(),
        net.output_activation().code(),
    ])?;
    let dims = net.layer_dims();
    out.write_all(&(dims.len() as u64).to_le_bytes())?;
    for d in dims {
        out.write_all(&(d as u64).to_le_bytes())?;
    }
    for p in net.params() {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Mlp> {
    let mut magic = [0u8; 6];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a network checkpoint".into()));
    }
    let mut head = [0u8; 3];
    input.read_exact(&mut head)?;
    if head[0] != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {}", head[0])));
    }
    let activation = |code| Activation::from_code(code).ok_or_else(|| Error::Format(format!("unknown activation code {code}")));
    let (hidden, output) = (activation(head[1])?, activation(head[2])?);
    let mut word = [0u8; 8];
    let mut read_u64 = |input: &mut R| -> Result<u64> {
        input.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let count = read_u64(&mut input)?;
    if !(2..=64).contains(&count) {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    let dims = (0..count)
        .map(|_| {
            let d = read_u64(&mut input)?;
            usize::try_from(d)
                .ok()
                .filter(|&d| d > 0 && d <= 1 << 24)
                .ok_or_else(|| Error::Format(format!("implausible layer size {d}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for w in dims.windows(2) {
        let mut layer = Dense::zeros(w[0], w[1]);
        for p in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
            input.read_exact(&mut word)?;
            *p = f64::from_le_bytes(word);
        }
        layers.push(layer);
    }
    let net = Mlp::from_layers(layers, hidden, output);
    if !net.all_finite() {
        return Err(Error::Format("checkpoint holds non-finite parameters".into()));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = Mlp::new(&[5, 7, 3], Activation::Tanh, Activation::Identity, &mut seeded(5)).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &net).unwrap();
        assert_eq!(bytes.len(), 6 + 3 + 8 + 3 * 8 + net.num_params() * 8);
        let back = read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_corrupt_headers() {
        let net = Mlp::zeros(&[2, 2], Activation::Tanh, Activation::Tanh).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &net).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(bad.as_slice()).is_err());
        let mut bad = bytes.clone();
        bad[6] = 99;
        assert!(read_checkpoint(bad.as_slice()).is_err());
        assert!(read_checkpoint(&bytes[..bytes.len() - 1]).is_err());
    }
}
