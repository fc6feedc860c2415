use hnerv::arch::{DecoderSpec, HNeRVConfig, VideoRepresentation};
use hnerv::media::FrameBuffer;
use hnerv::runtime::{
    compose_inpainting, decode_frame, decode_parallel, encode_frame, interpolate_embedding, mask_frame, DecodeRequest,
    FrameDecoder,
};
use hnerv::tensor::{MaskTensor, Tensor};
use hnerv::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn representation(frames: usize, ids: Vec<usize>, seed: u64) -> VideoRepresentation {
    let config = HNeRVConfig::preset("desk").unwrap();
    let spec = DecoderSpec::new(&config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VideoRepresentation {
        decoder: spec.init(seed),
        embeddings: Tensor::from_fn(vec![ids.len(), 8, 4, 8], |_| rng.gen_range(-1.0..1.0)),
        frame_ids: ids,
        num_frames: frames,
        encoder: None,
        config,
    }
}

#[test]
fn parallel_decode_is_bit_identical() {
    let rep = representation(12, (0..12).collect(), 1);
    let base = decode_parallel(&rep, &DecodeRequest::all(12, 1)).unwrap();
    for workers in [2, 3, 4, 8] {
        let out = decode_parallel(&rep, &DecodeRequest::all(12, workers)).unwrap();
        assert_eq!(out.report.workers, workers);
        for (a, b) in out.frames.iter().zip(&base.frames) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.data(), b.1.data());
        }
    }
}

#[test]
fn frames_decode_independently() {
    let rep = representation(8, (0..8).collect(), 2);
    let alone = decode_frame(&rep, 5).unwrap();
    let subset = decode_parallel(&rep, &DecodeRequest { frames: vec![7, 5, 1], workers: 2 }).unwrap();
    assert_eq!(subset.frames.iter().map(|f| f.0).collect::<Vec<_>>(), vec![7, 5, 1]);
    assert_eq!(subset.frames[1].1.data(), alone.data());
    let mut other = rep.clone();
    let row = other.embeddings.data_mut();
    row[..256].iter_mut().for_each(|v| *v = 0.0);
    assert_eq!(decode_frame(&other, 5).unwrap().data(), alone.data());
}

#[test]
fn one_forward_pass_per_requested_frame() {
    let rep = representation(10, (0..10).collect(), 3);
    let decoder = FrameDecoder::new(&rep).unwrap();
    let out = decoder.decode_parallel(&DecodeRequest { frames: vec![0, 2, 4, 6, 8], workers: 3 }).unwrap();
    assert_eq!(out.report.forward_passes, 5);
    assert_eq!(decoder.forward_passes(), 5);
    decoder.decode_frame(1).unwrap();
    assert_eq!(decoder.forward_passes(), 6);
    assert!(out.report.to_line().starts_with("decode frames=5 workers=3 "));
}

#[test]
fn decoded_frames_are_clamped() {
    let mut rep = representation(2, vec![0, 1], 4);
    rep.embeddings = rep.embeddings.map(|v| 50.0 * v);
    let f = decode_frame(&rep, 0).unwrap();
    assert!(f.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn bad_requests_are_usage_errors() {
    let rep = representation(4, (0..4).collect(), 5);
    for req in [
        DecodeRequest { frames: vec![4], workers: 1 },
        DecodeRequest { frames: vec![1, 1], workers: 1 },
        DecodeRequest { frames: vec![0], workers: 0 },
    ] {
        assert!(matches!(decode_parallel(&rep, &req), Err(Error::Usage(_))), "{req:?}");
    }
}

#[test]
fn interpolation_examples() {
    let rep = representation(7, vec![1, 3, 5], 6);
    let mid = interpolate_embedding(&rep, 2).unwrap();
    let (a, b) = (rep.embedding(1).unwrap(), rep.embedding(3).unwrap());
    for ((m, x), y) in mid.data().iter().zip(a.data()).zip(b.data()) {
        assert_eq!(*m, 0.5 * (x + y));
    }
    assert_eq!(interpolate_embedding(&rep, 0).unwrap(), a);
    assert_eq!(interpolate_embedding(&rep, 6).unwrap(), rep.embedding(5).unwrap());
    assert!(matches!(interpolate_embedding(&rep, 7), Err(Error::Usage(_))));
    let lonely = representation(5, vec![0], 7);
    assert!(interpolate_embedding(&lonely, 3).is_err());
}

#[test]
fn encoding_without_encoder_is_a_capability_error() {
    let rep = representation(2, vec![0, 1], 8);
    let f = FrameBuffer::filled(64, 128, [0.5; 3]).unwrap();
    assert!(matches!(encode_frame(&rep, &f), Err(Error::Capability(_))));
}

#[test]
fn compose_and_mask_examples() {
    let original = FrameBuffer::filled(2, 2, [0.1, 0.2, 0.3]).unwrap();
    let decoded = FrameBuffer::filled(2, 2, [0.9, 0.8, 0.7]).unwrap();
    let mask = MaskTensor::new([1, 1, 2, 2], vec![1, 0, 0, 1]).unwrap();
    let c = compose_inpainting(&original, &mask, &decoded).unwrap();
    assert_eq!(c.get(0, 0, 0), 0.9);
    assert_eq!(c.get(1, 0, 1), 0.2);
    assert_eq!(c.get(2, 1, 1), 0.7);
    let m = mask_frame(&original, &mask).unwrap();
    assert_eq!(m.get(0, 0, 0), 0.0);
    assert_eq!(m.get(2, 0, 1), 0.3);
    assert!(compose_inpainting(&original, &MaskTensor::zeros([1, 1, 3, 3]), &decoded).is_err());
}

#[test]
fn zero_embeddings_and_biases_give_identical_frames() {
    let mut rep = representation(3, vec![0, 1, 2], 9);
    rep.embeddings = Tensor::zeros(vec![3, 8, 4, 8]);
    for (name, t) in rep.decoder.iter_mut() {
        if name.ends_with(".bias") {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }
    let out = decode_parallel(&rep, &DecodeRequest::all(3, 2)).unwrap();
    let first = out.frames[0].1.data().to_vec();
    assert!(first.iter().all(|&v| v == first[0]));
    assert!(out.frames.iter().all(|(_, f)| f.data() == first.as_slice()));
}
