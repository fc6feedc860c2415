//! Pruning, quantization, entropy coding and the `.hnrv` container.

pub mod bitstream;
pub mod huffman;
pub mod pipeline;
pub mod prune;
pub mod quant;

pub use bitstream::{Bitstream, ContainerKind, Layout, TensorPayload, TensorRecord, MAGIC, VERSION};
pub use huffman::{huffman_decode, huffman_encode, pack_fixed, unpack_fixed, HuffmanStream, MAX_CODE_LEN};
pub use pipeline::{
    checkpoint_bitstream, compress, decompress, load_representation, read_bitstream, representation_from,
    save_checkpoint, CompressOptions, Compressed, Finetune, SizeReport, TensorSize, EMBEDDINGS,
};
pub use prune::{prune_global, prune_params, PruneSpec};
pub use quant::{dequantize, dequantize_f64, quantize, QuantSpec};
