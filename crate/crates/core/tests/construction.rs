use traster::tk2raster::{DeltaNodeKind, K2RasterDelta};
use traster::{zigzag_decode, zigzag_encode, Raster};

/// (T bit, eqB bit, decoded max gap) of the level-1 node `i`.
fn level1(d: &K2RasterDelta, i: usize) -> (bool, bool, i64) {
    let t = d.topology();
    let bit = t.access(i).unwrap();
    let eq = if bit {
        false
    } else {
        d.eq_bitmap().access(t.rank0(i).unwrap()).unwrap()
    };
    (bit, eq, zigzag_decode(d.max_gaps().access(i).unwrap()))
}

#[test]
fn identical_quadrant_is_a_zero_shift() {
    let snap = Raster::from_fn(8, 8, |r, c| ((r * 7 + c * 3) % 5) as i32).unwrap();
    let target = Raster::from_fn(8, 8, |r, c| {
        let v = snap.get(r, c).unwrap();
        if r < 4 && c < 4 {
            v
        } else {
            v + ((r + c) % 2) as i32
        }
    })
    .unwrap();
    let d = K2RasterDelta::build(&snap, &target, 2).unwrap();
    assert_eq!(d.root().kind, DeltaNodeKind::Internal);
    assert_eq!(level1(&d, 0), (false, true, 0));
    assert_eq!(d.max_gaps().access(0).unwrap(), 0);
    assert!(d.eq_bitmap().access(0).unwrap());
}

#[test]
fn uniform_increment_is_a_shift() {
    let snap = Raster::from_rows(&[vec![1, 2, 6, 6], vec![3, 4, 5, 5], vec![0, 9, 2, 8], vec![7, 1, 4, 3]]).unwrap();
    let target = Raster::from_rows(&[vec![2, 2, 7, 7], vec![3, 5, 6, 6], vec![1, 9, 2, 7], vec![7, 3, 4, 3]]).unwrap();
    let d = K2RasterDelta::build(&snap, &target, 2).unwrap();
    assert_eq!(level1(&d, 1), (false, true, 1));
    assert_eq!(d.max_gaps().access(1).unwrap(), zigzag_encode(1));
    assert_eq!(d.max_gaps().access(1).unwrap(), 2);
}

#[test]
fn uniform_target_over_varied_snapshot() {
    let snap = Raster::from_rows(&[vec![1, 2, 3, 2], vec![3, 4, 2, 3], vec![0, 9, 2, 8], vec![7, 1, 4, 3]]).unwrap();
    let target = Raster::from_rows(&[vec![2, 2, 4, 4], vec![3, 5, 4, 4], vec![1, 9, 2, 7], vec![7, 3, 4, 3]]).unwrap();
    let d = K2RasterDelta::build(&snap, &target, 2).unwrap();
    assert_eq!(level1(&d, 1), (false, false, 1));
    assert_eq!(
        traster::TK2Raster::build(&[snap, target], 2, 6)
            .unwrap()
            .get_cell_value(1, 3, 1)
            .unwrap(),
        4
    );
}
