use super::config::HNeRVConfig;
use super::model::{DecoderSpec, EncoderSpec};
use super::params::ParamMap;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// A fitted video: decoder weights plus one embedding per stored frame.
///
/// `embeddings` has shape `[S, d, h, w]`; row `i` belongs to frame
/// `frame_ids[i]`. Usually `S == num_frames` and `frame_ids` is `0..T`.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoRepresentation {
    pub config: HNeRVConfig,
    pub encoder: Option<ParamMap>,
    pub decoder: ParamMap,
    pub embeddings: Tensor,
    pub frame_ids: Vec<usize>,
    pub num_frames: usize,
}

impl VideoRepresentation {
    pub fn decoder_spec(&self) -> Result<DecoderSpec> {
        DecoderSpec::new(&self.config)
    }

    pub fn encoder_spec(&self) -> Result<EncoderSpec> {
        EncoderSpec::new(&self.config)
    }

    /// Embedding values plus decoder parameters; the encoder is not counted.
    pub fn total_size(&self) -> usize {
        self.embeddings.len() + self.decoder.numel()
    }

    pub fn stored_row(&self, frame: usize) -> Option<usize> {
        self.frame_ids.binary_search(&frame).ok()
    }

    /// Stored embedding of `frame` as `[1, d, h, w]`.
    pub fn embedding(&self, frame: usize) -> Result<Tensor> {
        if frame >= self.num_frames {
            return Err(Error::usage(format!(
                "frame {frame} out of range for {} frames",
                self.num_frames
            )));
        }
        let row = self
            .stored_row(frame)
            .ok_or_else(|| Error::usage(format!("frame {frame} has no stored embedding")))?;
        let e = self.embeddings.index_outer(row)?;
        let mut shape = vec![1];
        shape.extend_from_slice(e.shape());
        e.reshape(shape)
    }

    /// Checks shapes of every stored tensor against the configuration.
    pub fn validate(&self) -> Result<()> {
        let spec = self.decoder_spec()?;
        let e = self.config.embedding_spec();
        let expect = [self.frame_ids.len(), e.channels, e.height, e.width];
        if self.embeddings.shape() != expect {
            return Err(Error::format(format!(
                "embeddings have shape {:?}, expected {expect:?}",
                self.embeddings.shape()
            )));
        }
        if self.frame_ids.windows(2).any(|w| w[0] >= w[1])
            || self.frame_ids.last().is_some_and(|&f| f >= self.num_frames)
        {
            return Err(Error::format("stored frame ids must be ascending and in range"));
        }
        let reference = spec.init(0);
        check_shapes(&reference, &self.decoder)?;
        if let Some(enc) = &self.encoder {
            check_shapes(&self.encoder_spec()?.init(0), enc)?;
        }
        Ok(())
    }
}

fn check_shapes(reference: &ParamMap, actual: &ParamMap) -> Result<()> {
    if reference.len() != actual.len() {
        return Err(Error::format(format!(
            "expected {} parameter tensors, found {}",
            reference.len(),
            actual.len()
        )));
    }
    for (name, t) in reference.iter() {
        let a = actual.get(name)?;
        if a.shape() != t.shape() {
            return Err(Error::format(format!(
                "parameter {name:?} has shape {:?}, expected {:?}",
                a.shape(),
                t.shape()
            )));
        }
    }
    Ok(())
}
