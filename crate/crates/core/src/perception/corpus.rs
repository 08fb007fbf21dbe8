use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::glyph::{render_glyph, GlyphFamilySpec, GlyphImage, GLYPH_SIZE};
use crate::equation::Sym;

/// First bytes of every image block.
pub const IMAGE_MAGIC: &[u8] = b"ABLIMG1\n";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("malformed corpus: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Image block: magic, `u32` count, `u32` width, `u32` height, then every
/// pixel as a little-endian `f64`, image after image.
pub fn encode_images(images: &[GlyphImage]) -> Vec<u8> {
    let mut out = Vec::with_capacity(IMAGE_MAGIC.len() + 12 + images.len() * GLYPH_SIZE * GLYPH_SIZE * 8);
    out.extend_from_slice(IMAGE_MAGIC);
    out.extend_from_slice(&(images.len() as u32).to_le_bytes());
    out.extend_from_slice(&(GLYPH_SIZE as u32).to_le_bytes());
    out.extend_from_slice(&(GLYPH_SIZE as u32).to_le_bytes());
    for img in images {
        for p in img.pixels() {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    out
}

/// Decodes one image block from the front of `bytes`, returning the images
/// and the number of bytes consumed.
pub fn decode_images(bytes: &[u8]) -> Result<(Vec<GlyphImage>, usize), CorpusError> {
    let bad = |m: &str| CorpusError::Format(m.to_string());
    let rest = bytes.strip_prefix(IMAGE_MAGIC).ok_or_else(|| bad("bad image magic"))?;
    if rest.len() < 12 {
        return Err(bad("truncated image header"));
    }
    let word = |i: usize| u32::from_le_bytes(rest[i * 4..i * 4 + 4].try_into().expect("4 bytes")) as usize;
    let (count, width, height) = (word(0), word(1), word(2));
    if width != GLYPH_SIZE || height != GLYPH_SIZE {
        return Err(bad("unsupported image size"));
    }
    let per_image = width * height * 8;
    let body = &rest[12..];
    let need = count.checked_mul(per_image).ok_or_else(|| bad("image count overflows"))?;
    if body.len() < need {
        return Err(bad("truncated image data"));
    }
    let images = body[..need]
        .chunks_exact(per_image)
        .map(|chunk| {
            let pixels = chunk
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            GlyphImage::new(pixels).ok_or_else(|| bad("pixel outside [0, 1]"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((images, IMAGE_MAGIC.len() + 12 + need))
}

/// Parameters sufficient to regenerate a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub spec: GlyphFamilySpec,
    pub per_class: usize,
}

impl CorpusManifest {
    /// Renders `per_class` images of each symbol, interleaved by class,
    /// from one generator seeded with `spec.seed`.
    pub fn render(&self) -> (Vec<GlyphImage>, Vec<Sym>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        let mut images = Vec::with_capacity(self.per_class * 4);
        let mut labels = Vec::with_capacity(self.per_class * 4);
        for _ in 0..self.per_class {
            for sym in Sym::ALL {
                images.push(render_glyph(sym, &self.spec, &mut rng));
                labels.push(sym);
            }
        }
        (images, labels)
    }
}

/// Writes `manifest.json`, `images.bin` and the `labels.bin` sidecar.
pub fn write_corpus(dir: &Path, manifest: &CorpusManifest, images: &[GlyphImage], labels: &[Sym]) -> Result<(), CorpusError> {
    if images.len() != labels.len() {
        return Err(CorpusError::Format("one label per image required".into()));
    }
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(manifest).map_err(|e| CorpusError::Format(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json)?;
    fs::write(dir.join("images.bin"), encode_images(images))?;
    fs::write(dir.join("labels.bin"), labels.iter().map(|s| s.index() as u8).collect::<Vec<_>>())?;
    Ok(())
}

/// Reads the manifest and images only.
pub fn read_corpus(dir: &Path) -> Result<(CorpusManifest, Vec<GlyphImage>), CorpusError> {
    let manifest: CorpusManifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)
        .map_err(|e| CorpusError::Format(format!("manifest: {e}")))?;
    let bytes = fs::read(dir.join("images.bin"))?;
    let (images, used) = decode_images(&bytes)?;
    if used != bytes.len() {
        return Err(CorpusError::Format("trailing bytes after images".into()));
    }
    Ok((manifest, images))
}

/// Reads the evaluation-only label sidecar.
pub fn read_corpus_labels(dir: &Path) -> Result<Vec<Sym>, CorpusError> {
    fs::read(dir.join("labels.bin"))?
        .into_iter()
        .map(|b| Sym::from_index(b as usize).ok_or_else(|| CorpusError::Format(format!("bad label byte {b}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_block_round_trip() {
        let m = CorpusManifest {
            spec: GlyphFamilySpec::hard(4),
            per_class: 2,
        };
        let (images, _) = m.render();
        let bytes = encode_images(&images);
        let (back, used) = decode_images(&bytes).unwrap();
        assert_eq!(back, images);
        assert_eq!(used, bytes.len());
        assert!(decode_images(&bytes[..bytes.len() - 3]).is_err());
        assert!(decode_images(b"ABLIMG2\n").is_err());
    }

    #[test]
    fn corpus_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = CorpusManifest {
            spec: GlyphFamilySpec::easy(1),
            per_class: 3,
        };
        let (images, labels) = m.render();
        write_corpus(dir.path(), &m, &images, &labels).unwrap();
        let (m2, imgs2) = read_corpus(dir.path()).unwrap();
        assert_eq!(m2, m);
        assert_eq!(imgs2, images);
        assert_eq!(read_corpus_labels(dir.path()).unwrap(), labels);
        assert_eq!(m.render().0, images);
    }
}
