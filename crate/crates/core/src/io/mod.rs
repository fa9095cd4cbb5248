//! On-disk formats: RDMV embedding files, score files and result documents.

mod embeddings;
mod json;
mod record;
mod scores;

pub use embeddings::{
    decode_embeddings, encode_embeddings, read_embeddings, write_embeddings, DTYPE_F32_LE,
    FORMAT_VERSION, HEADER_LEN, MAGIC,
};
pub use json::{format_sig9, to_json_sig9};
pub use record::{parse_record, render_record, write_result, ConfigSnapshot, RunRecord};
pub use scores::{parse_scores, read_scores};
