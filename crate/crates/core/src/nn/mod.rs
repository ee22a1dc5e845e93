//! Dense networks with exact reverse-mode gradients, an adaptive-moment
//! optimizer and a binary checkpoint format.

mod adam;
mod checkpoint;
mod mlp;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use mlp::{soft_update, Activation, Dense, ForwardCache, Gradients, Mlp};
