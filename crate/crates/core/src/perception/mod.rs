//! Procedural glyph images for the four symbols and the classifier that
//! maps them to symbols.

mod corpus;
mod glyph;
mod model;

pub use corpus::{
    decode_images, encode_images, read_corpus, read_corpus_labels, write_corpus, CorpusError, CorpusManifest,
    IMAGE_MAGIC,
};
pub use glyph::{render_glyph, GlyphFamily, GlyphFamilySpec, GlyphImage, GLYPH_SIZE};
pub use model::{sequence_of, PerceptionModel};
