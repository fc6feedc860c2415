use hnerv::arch::{DecoderSpec, HNeRVConfig, ParamMap, VideoRepresentation};
use hnerv::compression::{
    compress, decompress, dequantize, dequantize_f64, huffman_decode, huffman_encode, pack_fixed, prune_params,
    quantize, unpack_fixed, CompressOptions, HuffmanStream, PruneSpec,
};
use hnerv::runtime::{decode_parallel, DecodeRequest};
use hnerv::tensor::Tensor;
use hnerv::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn representation(seed: u64) -> VideoRepresentation {
    let config = HNeRVConfig::preset("desk").unwrap();
    let spec = DecoderSpec::new(&config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VideoRepresentation {
        decoder: spec.init(seed),
        embeddings: Tensor::from_fn(vec![4, 8, 4, 8], |_| rng.gen_range(-1.0..1.0)),
        frame_ids: (0..4).collect(),
        num_frames: 4,
        encoder: None,
        config,
    }
}

fn options(sparsity: f64) -> CompressOptions {
    CompressOptions { prune: PruneSpec { sparsity, finetune_epochs: 0 }, ..Default::default() }
}

#[test]
fn hand_quantization_example() {
    let (codes, spec) = quantize(&[0.0, 0.3, 1.0], 2, false).unwrap();
    assert_eq!(codes, vec![0, 1, 3]);
    let v = dequantize_f64(&codes, &spec);
    for (a, b) in v.iter().zip([0.0, 1.0 / 3.0, 1.0]) {
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn constant_tensor_quantizes_exactly() {
    let (codes, spec) = quantize(&[0.7; 5], 8, false).unwrap();
    assert_eq!(spec.scale(), 0.0);
    assert_eq!(dequantize(&codes, &spec), vec![0.7; 5]);
    assert!(matches!(quantize(&[1.0], 0, false), Err(Error::Usage(_))));
    assert!(quantize(&[1.0], 17, false).is_err());
}

#[test]
fn huffman_edge_streams() {
    assert_eq!(huffman_encode(&[]).unwrap(), HuffmanStream::Empty);
    assert_eq!(huffman_decode(&HuffmanStream::Empty).unwrap(), Vec::<u32>::new());
    let run = huffman_encode(&[7; 9]).unwrap();
    assert_eq!(run, HuffmanStream::Run { symbol: 7, count: 9 });
    assert_eq!(huffman_decode(&run).unwrap(), vec![7; 9]);
    let skewed: Vec<u32> = (0..5000).map(|i| if i % 50 == 0 { i % 200 } else { 0 }).collect();
    let s = huffman_encode(&skewed).unwrap();
    assert!(s.payload_bits() < 2 * skewed.len() as u64);
    assert_eq!(huffman_decode(&s).unwrap(), skewed);
    assert!(matches!(huffman_encode(&[1, 1 << 16]), Err(Error::Usage(_))));
}

#[test]
fn pruning_zeroes_exactly_floor_qn() {
    let rep = representation(1);
    let n = rep.decoder.numel();
    for q in [0.0, 0.1, 0.25, 0.5, 0.999] {
        let mut params: ParamMap = rep.decoder.clone();
        let masks = prune_params(&mut params, q).unwrap();
        let k = (q * n as f64).floor() as usize;
        assert_eq!(masks.pruned(), k);
        let zeros = params.iter().flat_map(|(_, t)| t.data().iter()).filter(|&&v| v == 0.0).count();
        let bias_zeros = rep.decoder.iter().flat_map(|(_, t)| t.data().iter()).filter(|&&v| v == 0.0).count();
        assert!(zeros >= k && zeros <= k + bias_zeros);
    }
    assert!(prune_params(&mut rep.decoder.clone(), 1.0).is_err());
}

#[test]
fn larger_sparsity_gives_smaller_stream() {
    let rep = representation(2);
    let sizes: Vec<usize> = [0.0, 0.1, 0.25, 0.5, 0.75]
        .iter()
        .map(|&q| compress(&rep, &options(q), None).unwrap().bytes.len())
        .collect();
    assert!(sizes.windows(2).all(|w| w[1] < w[0]), "{sizes:?}");
    let bpp: Vec<f64> = [0.1, 0.5]
        .iter()
        .map(|&q| compress(&rep, &options(q), None).unwrap().report.bpp)
        .collect();
    assert!(bpp[1] < bpp[0]);
}

#[test]
fn stream_round_trip_decodes_bit_identically() {
    let rep = representation(3);
    let c = compress(&rep, &options(0.1), None).unwrap();
    let back = decompress(&c.bytes).unwrap();
    assert_eq!(back, c.quantized);
    let a = decode_parallel(&back, &DecodeRequest::all(4, 2)).unwrap();
    let b = decode_parallel(&c.quantized, &DecodeRequest::all(4, 1)).unwrap();
    for (x, y) in a.frames.iter().zip(&b.frames) {
        assert_eq!(x.1.data(), y.1.data());
    }
    assert_eq!(c.report.total_bytes, c.bytes.len());
}

#[test]
fn parallel_quantization_matches_sequential() {
    let rep = representation(4);
    let one = compress(&rep, &CompressOptions { workers: 1, ..options(0.2) }, None).unwrap();
    let many = compress(&rep, &CompressOptions { workers: 4, ..options(0.2) }, None).unwrap();
    assert_eq!(one.bytes, many.bytes);
}

#[test]
fn finetune_without_encoder_is_a_capability_error() {
    let rep = representation(5);
    let video = hnerv::media::generate_synthetic(hnerv::media::SynthKind::Constant, 4, 64, 128, 0).unwrap();
    let ctx = hnerv::compression::Finetune {
        source: &video,
        opt: Default::default(),
        plan: Default::default(),
        seed: 0,
    };
    let o = CompressOptions { prune: PruneSpec { sparsity: 0.1, finetune_epochs: 1 }, ..Default::default() };
    assert!(matches!(compress(&rep, &o, Some(ctx)), Err(Error::Capability(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantization_error_is_half_a_step(
        values in prop::collection::vec(-1000.0f32..1000.0, 1..200),
        bits in 1u8..=16,
        include_zero: bool,
    ) {
        let (codes, spec) = quantize(&values, bits, include_zero).unwrap();
        let half = spec.scale() / 2.0;
        prop_assert!(codes.iter().all(|&c| c <= spec.max_code()));
        for ((&v, a), b) in values.iter().zip(dequantize_f64(&codes, &spec)).zip(dequantize(&codes, &spec)) {
            prop_assert!((v as f64 - a).abs() <= half * (1.0 + 1e-12));
            let ulp = (b.abs() * f32::EPSILON) as f64;
            prop_assert!((v as f64 - b as f64).abs() <= half + ulp);
        }
    }

    #[test]
    fn huffman_round_trips(symbols in prop::collection::vec(0u32..65_536, 0..800), skew in 0u32..4) {
        let symbols: Vec<u32> = symbols.into_iter().map(|s| s >> (4 * skew)).collect();
        let s = huffman_encode(&symbols).unwrap();
        prop_assert_eq!(huffman_decode(&s).unwrap(), symbols);
    }

    #[test]
    fn fixed_width_round_trips(codes in prop::collection::vec(0u32..65_536, 0..300), bits in 1u8..=16) {
        let codes: Vec<u32> = codes.into_iter().map(|c| c & ((1 << bits) - 1)).collect();
        let (bytes, len) = pack_fixed(&codes, bits);
        prop_assert_eq!(len, codes.len() as u64 * bits as u64);
        prop_assert_eq!(unpack_fixed(&bytes, len, bits, codes.len()).unwrap(), codes);
    }

    #[test]
    fn corrupted_streams_never_panic(flips in prop::collection::vec((0usize..100_000, 1u8..=255), 1..4), cut in 0usize..100_000) {
        let bytes = compress(&representation(6), &options(0.1), None).unwrap().bytes;
        let mut bad = bytes.clone();
        for (i, x) in flips {
            let n = bad.len();
            bad[i % n] ^= x;
        }
        if bad != bytes {
            prop_assert!(decompress(&bad).is_err());
        }
        let cut = cut % bytes.len();
        prop_assert!(decompress(&bytes[..cut]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        prop_assert!(decompress(&long).is_err());
    }
}
