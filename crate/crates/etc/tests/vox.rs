use etc::vox::{decode, encode, read_vox, write_vox, Dtype, FormatErrorKind, HEADER_LEN};
use etc_core::{GridSpec, OrthotropicField};
use proptest::prelude::*;

fn field(narrow: bool) -> impl Strategy<Value = OrthotropicField> {
    (1usize..6, 1usize..6, 1usize..6, 0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0).prop_flat_map(
        move |(nx, ny, nz, lx, ly, lz)| {
            let n = nx * ny * nz;
            let arr = || prop::collection::vec(1e-6f64..1e6, n);
            (arr(), arr(), arr()).prop_map(move |(a, b, c)| {
                let r = |v: Vec<f64>| if narrow { v.into_iter().map(|x| x as f32 as f64).collect() } else { v };
                OrthotropicField::new(GridSpec::new(nx, ny, nz, lx, ly, lz).unwrap(), r(a), r(b), r(c)).unwrap()
            })
        },
    )
}

proptest! {
    #[test]
    fn f64_round_trip(f in field(false)) {
        let bytes = encode(&f, Dtype::F64);
        prop_assert_eq!(bytes.len(), HEADER_LEN + 3 * f.grid().len() * 8);
        prop_assert_eq!(decode(&bytes).unwrap(), (f, Dtype::F64));
    }

    #[test]
    fn f32_round_trip(f in field(true)) {
        let bytes = encode(&f, Dtype::F32);
        let (back, dtype) = decode(&bytes).unwrap();
        prop_assert_eq!(dtype, Dtype::F32);
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(encode(&back, Dtype::F32), bytes);
    }

    #[test]
    fn truncation_is_reported(f in field(false), cut in 0usize..2000) {
        let bytes = encode(&f, Dtype::F64);
        let cut = cut % bytes.len();
        let e = decode(&bytes[..cut]).unwrap_err();
        prop_assert!(e.offset <= cut);
        let known = matches!(e.kind, FormatErrorKind::Truncated { .. } | FormatErrorKind::BadMagic);
        prop_assert!(known, "unexpected {:?}", e.kind);
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::unit_cube(4).unwrap();
    let f = OrthotropicField::from_fn(g, |x, y, z| [1.0 + x, 2.0 + y, 3.0 + z]).unwrap();
    let p = dir.path().join("a.vox");
    write_vox(&f, Dtype::F64, &p).unwrap();
    assert_eq!(std::fs::metadata(&p).unwrap().len(), 1581);
    assert_eq!(&std::fs::read(&p).unwrap()[..8], b"ETCVOX01");
    assert_eq!(read_vox(&p).unwrap().0, f);
}

#[test]
fn bad_header_fields() {
    let g = GridSpec::unit_cube(2).unwrap();
    let f = OrthotropicField::homogeneous(g, [1.0; 3]).unwrap();
    let mut b = encode(&f, Dtype::F64);
    b[12..16].copy_from_slice(&0u32.to_le_bytes());
    assert_eq!(decode(&b).unwrap_err().offset, 12);
    let mut b = encode(&f, Dtype::F64);
    b[28..36].copy_from_slice(&f64::NAN.to_le_bytes());
    assert_eq!(decode(&b).unwrap_err().offset, 28);
}
