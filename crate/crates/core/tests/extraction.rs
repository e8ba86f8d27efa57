use ettc_core::annotation::select_max_score;
use ettc_core::extraction::{
    carina_from_mask, extract, fuse_carina, fuse_tip, point_from_box, tip_from_mask, FusionConfig,
    PointSource, CENTRAL_WINDOW,
};
use ettc_core::fixtures::{generate, FixtureSpec};
use ettc_core::raster::{densest_window_center, skeletonize, BinaryMask, PixelPoint};

/// One-pixel inverted Y: stem from above meeting two diagonal branches at
/// the branch pixel.
fn thin_y(branch: PixelPoint, arm: i32) -> BinaryMask {
    let mut m = BinaryMask::new(400, 400);
    for k in 0..=arm {
        m.set_point(branch.offset(0, -k), true);
        m.set_point(branch.offset(-k, k), true);
        m.set_point(branch.offset(k, k), true);
    }
    m
}

#[test]
fn branch_pixel_is_the_central_point() {
    let branch = PixelPoint::new(200, 300);
    let m = thin_y(branch, 70);
    let skeleton = skeletonize(&m).unwrap();
    assert_eq!(skeleton, m);
    assert_eq!(densest_window_center(&skeleton, &skeleton, CENTRAL_WINDOW).unwrap(), branch);
    assert_eq!(carina_from_mask(&m).unwrap().central, branch);
}

#[test]
fn extract_equals_hand_composition() {
    let mut spec = FixtureSpec::standard("c", PixelPoint::new(300, 120), PixelPoint::new(310, 340), 0.4);
    spec.perturbation.carina_box_offset = [0, 60];
    spec.perturbation.tip_box_offset = [3, -2];
    spec.perturbation.decoys = true;
    let f = generate(&spec).unwrap();
    let got = extract(&f.detections, 0.4, &FusionConfig::default());

    let sel = select_max_score(&f.detections);
    let tip_box = point_from_box(&sel.tube_tip_box.unwrap().rect().unwrap());
    let tip_mask = tip_from_mask(sel.tube.unwrap().mask().unwrap()).unwrap();
    let carina_box = point_from_box(&sel.carina_box.unwrap().rect().unwrap());
    let carina_mask = carina_from_mask(sel.carina.unwrap().mask().unwrap()).unwrap().point;
    let (tip, ts) = fuse_tip(Some(tip_box), Some(tip_mask));
    let (carina, cs) = fuse_carina(Some(carina_box), Some(carina_mask), 100.0);
    assert_eq!(got.tip, tip);
    assert_eq!(got.carina, carina);
    assert_eq!((got.tip_source, got.carina_source), (ts, cs));
    assert_eq!(got.tip_mask_point, Some(tip_mask));
    assert_eq!(got.carina_mask_point, Some(carina_mask));
    let d = tip.unwrap().distance(carina.unwrap());
    assert_eq!(got.distance_px, Some(d));
    assert_eq!(got.distance_mm, Some(d * 0.4));
}

#[test]
fn degenerate_masks_return_points() {
    // single pixel
    let mut one = BinaryMask::new(50, 50);
    one.set(20, 30, true);
    let c = carina_from_mask(&one).unwrap();
    assert_eq!(c.point, PixelPoint::new(20, 30));
    assert_eq!(tip_from_mask(&one).unwrap(), PixelPoint::new(20, 30));

    // thin line without a branch
    let line = BinaryMask::from_fn(80, 200, |x, y| x == 40 && (20..180).contains(&y));
    let a = carina_from_mask(&line).unwrap();
    assert_eq!(a, carina_from_mask(&line).unwrap());
    assert!(line.at(a.point));

    // a solid frame-filling mask has no edges inside the patch
    let full = BinaryMask::from_fn(300, 300, |_, _| true);
    let f = carina_from_mask(&full).unwrap();
    assert!(f.fallback);
    assert_eq!(f.point, f.central);
}

#[test]
fn mask_only_fixture_uses_mask_sources() {
    let mut spec = FixtureSpec::standard("m", PixelPoint::new(320, 150), PixelPoint::new(330, 360), 0.5);
    spec.perturbation.drop_tip_box = true;
    spec.perturbation.drop_carina_box = true;
    let f = generate(&spec).unwrap();
    let r = extract(&f.detections, 0.5, &FusionConfig::default());
    assert_eq!((r.tip_source, r.carina_source), (PointSource::Mask, PointSource::Mask));
    assert!(f.expected.tip_ok(r.tip));
    assert!(f.expected.carina_ok(r.carina));
    assert!(r.carina.unwrap().distance(PixelPoint::new(330, 360)) <= 2.0);
}
