use inspect_core::enhance::{histogram_specification, mmsiche};
use inspect_core::image::{histogram, quantize_level};
use inspect_core::synth::{generate_synthetic_pair, DefectKind, SyntheticSpec};

#[test]
fn measure_mmsiche_displacement() {
    for size in [128usize, 1024] {
        let spec = SyntheticSpec::new(DefectKind::None, size, size);
        let pair = generate_synthetic_pair(31, &spec).unwrap();
        let reference = pair.reference;
        let hs = histogram_specification(&reference, &histogram(&reference)).unwrap();
        let enhanced = mmsiche(&hs).unwrap();
        let mut max_disp = 0usize;
        let mut big = 0usize;
        for (a, b) in reference.pixels().iter().zip(enhanced.pixels()) {
            let ka = quantize_level(*a, 256);
            let kb = quantize_level(*b, 256);
            let d = ka.abs_diff(kb);
            if d > max_disp { max_disp = d; }
            if d >= 38 { big += 1; }
        }
        println!("size {size}: max level displacement {max_disp}, pixels >= 38 levels: {big}");
    }
}
