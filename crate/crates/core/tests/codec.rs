mod support;

use proptest::prelude::*;

use damut_core::codec::{bit_get, decode, encode, ItemLocator, ItemValue};
use damut_core::faultmodel::{Endianness, RepresentationType};

use support::properties::Item;

fn locator(position: usize, item: Item, rep: RepresentationType, scale: Option<f64>) -> ItemLocator {
    ItemLocator {
        position,
        span: item.width,
        unit_size: 1,
        rep,
        endianness: if item.big_endian { Endianness::Big } else { Endianness::Little },
        scale,
    }
}

fn item() -> impl Strategy<Value = Item> {
    (prop::sample::select(vec![1usize, 2, 3, 4, 5, 6, 7, 8]), any::<bool>(), any::<bool>())
        .prop_map(|(width, signed, big_endian)| Item { width, signed, big_endian })
}

proptest! {
    #[test]
    fn integers_round_trip_and_match_byte_layout(it in item(), raw in any::<u64>(), position in 0usize..4, fill in any::<u8>()) {
        let (lo, hi) = it.bounds();
        let v = lo + (u128::from(raw) % ((hi - lo) as u128 + 1)) as i128;
        let rep = if it.signed { RepresentationType::Int } else { RepresentationType::Hex };
        let loc = locator(position, it, rep, None);
        let mut buffer = vec![fill; position + it.width + 2];
        encode(&ItemValue::Integer(v), &loc, &mut buffer).unwrap();
        prop_assert_eq!(&buffer[position..position + it.width], &it.encode(v)[..]);
        prop_assert!(buffer[..position].iter().chain(&buffer[position + it.width..]).all(|b| *b == fill));
        prop_assert_eq!(decode(&buffer, &loc).unwrap(), ItemValue::Integer(v));
        prop_assert!(encode(&ItemValue::Integer(hi + 1), &loc, &mut buffer).is_err());
        prop_assert!(encode(&ItemValue::Integer(lo - 1), &loc, &mut buffer).is_err());
    }

    #[test]
    fn fixed_point_quantizes_to_nearest_step(raw in -30_000i32..30_000, big_endian in any::<bool>()) {
        let it = Item { width: 2, signed: true, big_endian };
        let loc = locator(0, it, RepresentationType::Double, Some(0.01));
        let mut buffer = [0u8; 2];
        let x = f64::from(raw) * 0.01 + 0.004;
        encode(&ItemValue::Real(x), &loc, &mut buffer).unwrap();
        prop_assert_eq!(it.decode(&buffer), i128::from(raw));
        prop_assert_eq!(decode(&buffer, &loc).unwrap(), ItemValue::Real(f64::from(raw) * 0.01));
    }

    #[test]
    fn bit_zero_is_least_significant(width in 1usize..=8, index in 0usize..64, big_endian in any::<bool>()) {
        let index = index % (width * 8);
        let it = Item { width, signed: false, big_endian };
        let bytes = it.encode(1i128 << index);
        let endianness = if big_endian { Endianness::Big } else { Endianness::Little };
        for i in 0..width * 8 {
            prop_assert_eq!(bit_get(&bytes, i, endianness).unwrap(), i == index);
        }
    }
}

#[test]
fn native_reals_keep_their_bits() {
    let it = Item { width: 8, signed: false, big_endian: true };
    let loc = locator(0, it, RepresentationType::Double, None);
    for x in [0.0, -0.0, f64::NAN, f64::INFINITY, 5e-324, -1.5] {
        let mut buffer = [0u8; 8];
        encode(&ItemValue::Real(x), &loc, &mut buffer).unwrap();
        assert_eq!(buffer, x.to_be_bytes());
    }
    let single = locator(0, Item { width: 4, signed: false, big_endian: false }, RepresentationType::Float, None);
    let mut buffer = [0u8; 4];
    assert!(encode(&ItemValue::Real(1e300), &single, &mut buffer).is_err());
    encode(&ItemValue::Real(0.1), &single, &mut buffer).unwrap();
    assert_eq!(buffer, 0.1f32.to_le_bytes());
}
