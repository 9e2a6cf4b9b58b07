//! Property tests for the structural invariants of the solution-space
//! machinery.

use lhe_core::opt::project;
use lhe_core::{dof, mse, pgm, GrayImage, RealField, WindowSpec};
use proptest::prelude::*;

/// Arbitrary image with levels in {8, 256} and any fitting window.
fn image_and_window() -> impl Strategy<Value = (GrayImage, WindowSpec)> {
    (3usize..12, 3usize..12, prop_oneof![Just(8u32), Just(256u32)])
        .prop_flat_map(|(w, h, levels)| {
            let max_half = (w.min(h) - 1) / 2;
            (
                proptest::collection::vec(0..levels as u16, w * h),
                Just((w, h, levels)),
                1..=max_half.max(1),
            )
        })
        .prop_map(|(pixels, (w, h, levels), half)| {
            (
                GrayImage::new(w, h, levels, pixels).unwrap(),
                WindowSpec::new(half).unwrap(),
            )
        })
}

proptest! {
    #[test]
    fn pgm_round_trip_is_identity(
        w in 1usize..20,
        h in 1usize..20,
        seed in any::<u64>(),
    ) {
        let mut state = seed | 1;
        let image = GrayImage::from_fn(w, h, 256, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 256) as u16
        }).unwrap();
        let decoded = pgm::decode_pgm(&pgm::encode_pgm(&image)).unwrap();
        prop_assert_eq!(decoded, image);
    }

    #[test]
    fn dof_bounds_are_ordered_and_hold_the_lhe_result(
        (image, win) in image_and_window(),
    ) {
        let bounds = dof::dof_bounds(&image, win);
        for i in 0..image.pixels().len() {
            prop_assert!(bounds.lower()[i] <= bounds.upper()[i]);
            prop_assert!(bounds.upper()[i] <= image.max_level());
        }
        prop_assert!(bounds.contains(&dof::basic_lhe(&image, win)));
        prop_assert!(dof::solution_space_log2(&bounds) >= 0.0);
    }

    #[test]
    fn rank_width_equals_center_bin_count(
        (image, win) in image_and_window(),
        coord in any::<(u16, u16)>(),
    ) {
        let m = coord.0 as usize % image.height();
        let n = coord.1 as usize % image.width();
        let range = dof::rank_range(&image, win, m, n).unwrap();
        let (m0, m1) = (m.saturating_sub(win.half_width()), (m + win.half_width()).min(image.height() - 1));
        let (n0, n1) = (n.saturating_sub(win.half_width()), (n + win.half_width()).min(image.width() - 1));
        let mut bin = 0;
        for mm in m0..=m1 {
            for nn in n0..=n1 {
                if image.get(mm, nn) == image.get(m, n) {
                    bin += 1;
                }
            }
        }
        prop_assert_eq!(range.width(), bin);
        prop_assert!(range.max_rank() as usize <= (m1 - m0 + 1) * (n1 - n0 + 1));
    }

    #[test]
    fn mse_extremes_bracket_every_feasible_solution(
        (image, win) in image_and_window(),
        seed in any::<u64>(),
    ) {
        let bounds = dof::dof_bounds(&image, win);
        let best = mse::min_mse_solution(&image, &bounds);
        let worst = mse::max_mse_solution(&image, &bounds);
        prop_assert!(bounds.contains(&best));
        prop_assert!(bounds.contains(&worst));

        let mut state = seed | 1;
        let pixels: Vec<u16> = (0..image.pixels().len()).map(|i| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let span = u64::from(bounds.upper()[i] - bounds.lower()[i]) + 1;
            bounds.lower()[i] + (state % span) as u16
        }).collect();
        let solution = GrayImage::new(image.width(), image.height(), image.levels(), pixels).unwrap();
        let e = mse::mse(&image, &solution).unwrap();
        prop_assert!(mse::mse(&image, &best).unwrap() <= e);
        prop_assert!(e <= mse::mse(&image, &worst).unwrap());
    }

    #[test]
    fn projection_lands_inside_the_bounds(
        (image, win) in image_and_window(),
        offsets in proptest::collection::vec(-400.0f64..400.0, 1..144),
    ) {
        let bounds = dof::dof_bounds(&image, win);
        let field = RealField::from_fn(image.width(), image.height(), |m, n| {
            let i = m * image.width() + n;
            f64::from(image.get(m, n)) + offsets[i % offsets.len()]
        });
        let projected = project(&field, &bounds).unwrap();
        prop_assert!(bounds.contains(&projected));
    }
}
