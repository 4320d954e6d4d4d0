use roadfuse::geometry::{dot, up_vector, PointCloud};
use roadfuse::pipeline::Pipeline;
use roadfuse::stereo::{ransac_plane, unproject, RansacParams, TiltGate};
use roadfuse::synth::{render_depth, render_frame, scene_config, suite_by_name, Surface};
use roadfuse::Channel;

#[test]
fn noiseless_floor_plane_is_exact() {
    let mut spec = suite_by_name("s5").unwrap().scenes[0].clone();
    spec.disparity_noise_sigma = 0.0;
    let (bundle, truth) = render_frame(&spec, 0, 0).unwrap();
    let depth = render_depth(&spec, 0);
    let all = unproject(&bundle.disparity, &spec.rig.camera, 1e9);
    let floor: Vec<_> = all
        .points
        .iter()
        .filter(|p| *depth.surface.get(p.src_pixel[0] as usize, p.src_pixel[1] as usize) == Surface::Floor)
        .step_by(97)
        .copied()
        .collect();
    let gate = TiltGate {
        up: up_vector::<f64>(spec.rig.pitch_deg),
        max_tilt_deg: 20.0,
    };
    let plane = ransac_plane(&PointCloud::new(floor), &RansacParams::default(), Some(&gate)).unwrap();
    assert!((plane.offset - truth.true_plane.offset).abs() < 1e-6);
    assert!(1.0 - dot(plane.normal, truth.true_plane.normal) < 1e-9);
}

#[test]
fn pipeline_is_repeatable() {
    let mut spec = suite_by_name("s3").unwrap().scenes[0].clone();
    spec.frames = 4;
    let cfg = scene_config(&spec).unwrap();
    let run = || {
        let p = Pipeline::new(cfg.clone(), spec.rig.width, spec.rig.height).unwrap();
        let mut state = p.new_state().unwrap();
        (0..spec.frames)
            .map(|f| {
                let (b, _) = render_frame(&spec, 11, f).unwrap();
                let r = p.process(&b, &mut state).unwrap();
                (r.rgb_boxes, r.stereo_boxes, r.detections)
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn multi_box_scene_needs_both_channels() {
    let mut spec = suite_by_name("s3").unwrap().scenes[0].clone();
    spec.frames = 5;
    let cfg = scene_config(&spec).unwrap();
    let p = Pipeline::new(cfg, spec.rig.width, spec.rig.height).unwrap();
    let mut state = p.new_state().unwrap();
    let mut last = None;
    for f in 0..spec.frames {
        let (b, truth) = render_frame(&spec, 5, f).unwrap();
        last = Some((p.process(&b, &mut state).unwrap(), truth));
    }
    let (r, truth) = last.unwrap();
    assert!(r.ground_found);
    for t in &truth.true_boxes {
        let hit = r.detections.iter().any(|d| roadfuse::bbox_iou(&d.bbox, &t.bbox) >= 0.5);
        assert!(hit, "obstacle {} not detected: {:?}", t.id, r.detections);
    }
    let channels: Vec<Channel> = r.detections.iter().map(|d| d.bbox.channel).collect();
    assert!(channels.contains(&Channel::Rgb) || channels.contains(&Channel::Fused));
    assert!(channels.contains(&Channel::Stereo) || channels.contains(&Channel::Fused));
}
