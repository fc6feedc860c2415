use std::ffi::{CStr, CString};
use std::ptr;

use hnerv::arch::{DecoderSpec, EncoderSpec, HNeRVConfig, VideoRepresentation};
use hnerv::compression::checkpoint_bitstream;
use hnerv::runtime::decode_frame;
use hnerv::tensor::Tensor;
use hnerv_ffi::*;

fn rep() -> VideoRepresentation {
    let config = HNeRVConfig::preset("desk").unwrap();
    let e = config.embedding_spec();
    let n = 4 * e.channels * e.height * e.width;
    VideoRepresentation {
        encoder: Some(EncoderSpec::new(&config).unwrap().init(2)),
        decoder: DecoderSpec::new(&config).unwrap().init(1),
        embeddings: Tensor::new(vec![4, e.channels, e.height, e.width], (0..n).map(|i| (i % 17) as f32 / 8.0 - 1.0).collect()).unwrap(),
        frame_ids: vec![0, 1, 2, 3],
        num_frames: 4,
        config,
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hnerv_last_error()) }.to_str().unwrap().to_string()
}

fn load(bytes: &[u8]) -> *mut HnervModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hnerv_model_load(bytes.as_ptr(), bytes.len(), &mut m) }, HnervStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn load_info_decode_matches_library() {
    let r = rep();
    let bytes = checkpoint_bitstream(&r).unwrap().to_bytes();
    let m = load(&bytes);
    let mut info = HnervInfo::default();
    assert_eq!(unsafe { hnerv_model_info(m, &mut info) }, HnervStatus::Ok);
    assert_eq!((info.num_frames, info.stored_frames, info.height, info.width), (4, 4, 64, 128));
    assert_eq!(info.total_size, r.total_size());
    assert!(info.has_encoder);

    let per = 3 * 64 * 128;
    let mut one = vec![0u8; per];
    assert_eq!(unsafe { hnerv_decode_frame_rgb8(m, 2, one.as_mut_ptr(), one.len()) }, HnervStatus::Ok);
    assert_eq!(one, decode_frame(&r, 2).unwrap().to_rgb8());

    let ids = [3usize, 0, 2];
    let mut many = vec![0u8; 3 * per];
    let s = unsafe { hnerv_decode_frames_rgb8(m, ids.as_ptr(), ids.len(), 2, many.as_mut_ptr(), many.len()) };
    assert_eq!(s, HnervStatus::Ok);
    assert_eq!(&many[2 * per..], &one[..]);
    unsafe { hnerv_model_free(m) };
}

#[test]
fn compress_round_trip_drops_encoder() {
    let bytes = checkpoint_bitstream(&rep()).unwrap().to_bytes();
    let m = load(&bytes);
    let mut buf = HnervBuffer { data: ptr::null_mut(), len: 0 };
    assert_eq!(unsafe { hnerv_compress(m, 0.1, 8, 2, &mut buf) }, HnervStatus::Ok);
    let compressed = unsafe { std::slice::from_raw_parts(buf.data, buf.len) }.to_vec();
    unsafe { hnerv_buffer_free(buf) };
    assert!(compressed.len() < bytes.len());
    let c = load(&compressed);
    let mut info = HnervInfo::default();
    assert_eq!(unsafe { hnerv_model_info(c, &mut info) }, HnervStatus::Ok);
    assert!(!info.has_encoder);

    let mut ck = HnervBuffer { data: ptr::null_mut(), len: 0 };
    assert_eq!(unsafe { hnerv_checkpoint(c, &mut ck) }, HnervStatus::Ok);
    assert!(ck.len > 0);
    unsafe {
        hnerv_buffer_free(ck);
        hnerv_model_free(c);
        hnerv_model_free(m);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    let mut bytes = checkpoint_bitstream(&rep()).unwrap().to_bytes();
    bytes[20] ^= 1;
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hnerv_model_load(bytes.as_ptr(), bytes.len(), &mut m) }, HnervStatus::Data);
    assert!(m.is_null());
    assert!(last_error().contains("checksum"));

    assert_eq!(unsafe { hnerv_model_load(ptr::null(), 0, &mut m) }, HnervStatus::NullPointer);
    let path = CString::new("/nonexistent/file.hnrv").unwrap();
    assert_eq!(unsafe { hnerv_model_load_file(path.as_ptr(), &mut m) }, HnervStatus::Data);

    let good = checkpoint_bitstream(&rep()).unwrap().to_bytes();
    let m = load(&good);
    assert_eq!(last_error(), "");
    let mut small = vec![0u8; 10];
    assert_eq!(unsafe { hnerv_decode_frame_rgb8(m, 0, small.as_mut_ptr(), small.len()) }, HnervStatus::BufferTooSmall);
    let mut full = vec![0u8; 3 * 64 * 128];
    assert_eq!(unsafe { hnerv_decode_frame_rgb8(m, 9, full.as_mut_ptr(), full.len()) }, HnervStatus::Usage);
    let mut buf = HnervBuffer { data: ptr::null_mut(), len: 0 };
    assert_eq!(unsafe { hnerv_compress(m, 1.5, 8, 1, &mut buf) }, HnervStatus::Usage);
    assert_eq!(unsafe { hnerv_compress(m, 0.1, 8, 0, &mut buf) }, HnervStatus::Usage);
    unsafe {
        hnerv_model_free(m);
        hnerv_model_free(ptr::null_mut());
    }
    assert!(!unsafe { CStr::from_ptr(hnerv_version()) }.to_str().unwrap().is_empty());
}

#[test]
fn header_declares_api_and_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/hnerv.h")).unwrap();
    for name in ["hnerv_model_load", "hnerv_model_free", "hnerv_decode_frames_rgb8", "hnerv_compress", "hnerv_buffer_free", "hnerv_last_error", "typedef struct HnervModel HnervModel"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("cc not found; C compile check skipped");
        return;
    };
    assert!(cc.status.success());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"hnerv.h\"\nint main(void) {\n  HnervModel *m = 0;\n  HnervStatus s = hnerv_model_load(0, 0, &m);\n  hnerv_model_free(m);\n  return s == HNERV_STATUS_OK;\n}\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
