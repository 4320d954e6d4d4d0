//! Cross-channel merging by box-center proximity.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bbox::{bbox_union, center_distance, BBox2D, Channel};
use crate::grid::Mask;

/// A final obstacle hypothesis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox2D,
    /// Contributing channels, never empty.
    pub sources: BTreeSet<Channel>,
    pub frames_present: usize,
}

/// Which channel wins ties in the greedy merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    #[default]
    StereoFirst,
    RgbFirst,
}

struct Candidate {
    bbox: BBox2D,
    channel: Channel,
    frames: usize,
    rank: u8,
    order: usize,
}

/// Greedy center-distance suppression over both channels' boxes, each box
/// tagged with how many frames it was seen in.
///
/// Candidates are visited by channel priority, then descending area. Each
/// accepted box absorbs every unvisited box whose center lies strictly within
/// `dist_threshold` of its own; the detection's box becomes the union of all
/// absorbed boxes.
pub fn fuse_tracked(
    rgb: &[(BBox2D, usize)],
    stereo: &[(BBox2D, usize)],
    dist_threshold: f64,
    priority: Priority,
) -> Vec<Detection> {
    let (rgb_rank, stereo_rank) = match priority {
        Priority::StereoFirst => (1, 0),
        Priority::RgbFirst => (0, 1),
    };
    let mut cands: Vec<Candidate> = stereo
        .iter()
        .map(|&(b, f)| (b, f, Channel::Stereo, stereo_rank))
        .chain(rgb.iter().map(|&(b, f)| (b, f, Channel::Rgb, rgb_rank)))
        .enumerate()
        .map(|(order, (bbox, frames, channel, rank))| Candidate {
            bbox,
            channel,
            frames,
            rank,
            order,
        })
        .collect();
    cands.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(b.bbox.area().cmp(&a.bbox.area()))
            .then(a.order.cmp(&b.order))
    });

    let mut taken = vec![false; cands.len()];
    let mut out = Vec::new();
    for i in 0..cands.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let head = &cands[i];
        let mut bbox = head.bbox.with_channel(head.channel);
        let mut sources = BTreeSet::from([head.channel]);
        let mut frames = head.frames;
        for j in i + 1..cands.len() {
            if taken[j] || center_distance(&head.bbox, &cands[j].bbox) >= dist_threshold {
                continue;
            }
            taken[j] = true;
            bbox = bbox_union(&bbox, &cands[j].bbox);
            sources.insert(cands[j].channel);
            frames = frames.max(cands[j].frames);
        }
        let channel = if sources.len() > 1 {
            Channel::Fused
        } else {
            head.channel
        };
        out.push(Detection {
            bbox: bbox.with_channel(channel),
            sources,
            frames_present: frames.max(1),
        });
    }
    out
}

/// Center-distance NMS on single-frame box lists.
pub fn fuse_by_center_nms(rgb: &[BBox2D], stereo: &[BBox2D], dist_threshold: f64) -> Vec<Detection> {
    let tag = |v: &[BBox2D]| v.iter().map(|&b| (b, 1)).collect::<Vec<_>>();
    fuse_tracked(&tag(rgb), &tag(stereo), dist_threshold, Priority::StereoFirst)
}

/// Keeps detections whose center pixel is set in `roi`.
pub fn gate_by_roi(dets: Vec<Detection>, roi: &Mask) -> Vec<Detection> {
    dets.into_iter()
        .filter(|d| {
            let (cx, cy) = d.bbox.center_pixel();
            cx >= 0
                && cy >= 0
                && (cx as usize) < roi.width()
                && (cy as usize) < roi.height()
                && *roi.get(cx as usize, cy as usize)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn around(cx: i32, cy: i32, r: i32, ch: Channel) -> BBox2D {
        BBox2D::new(cx - r, cy - r, cx + r, cy + r, ch)
    }

    #[test]
    fn close_centers_fuse() {
        let rgb = [around(100, 100, 10, Channel::Rgb)];
        let stereo = [around(103, 102, 12, Channel::Stereo)];
        let dets = fuse_by_center_nms(&rgb, &stereo, 10.0);
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].sources, BTreeSet::from([Channel::Rgb, Channel::Stereo]));
        assert_eq!(dets[0].bbox.channel, Channel::Fused);
        assert!(dets[0].bbox.contains(&rgb[0]) && dets[0].bbox.contains(&stereo[0]));
    }

    #[test]
    fn far_boxes_stay_apart() {
        let dets = fuse_by_center_nms(&[around(100, 100, 5, Channel::Rgb)], &[around(600, 100, 5, Channel::Stereo)], 10.0);
        assert_eq!(dets.len(), 2);
        assert_eq!(dets[0].sources, BTreeSet::from([Channel::Stereo]));
    }

    #[test]
    fn rgb_only_passes_through() {
        let rgb = [around(50, 50, 5, Channel::Rgb), around(300, 50, 5, Channel::Rgb)];
        let dets = fuse_by_center_nms(&rgb, &[], 40.0);
        assert_eq!(dets.len(), 2);
        assert!(dets.iter().all(|d| d.sources == BTreeSet::from([Channel::Rgb])));
    }

    #[test]
    fn roi_gate() {
        let roi = Grid::from_fn(100, 100, |x, _| x < 50);
        let dets = fuse_by_center_nms(&[around(20, 20, 3, Channel::Rgb), around(80, 20, 3, Channel::Rgb)], &[], 5.0);
        let kept = gate_by_roi(dets, &roi);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].bbox.center_pixel(), (20, 20));
        assert!(gate_by_roi(Vec::new(), &roi).is_empty());
    }

    fn arb_boxes(ch: Channel) -> impl Strategy<Value = Vec<BBox2D>> {
        proptest::collection::vec((0i32..400, 0i32..400, 0i32..30, 0i32..30), 0..10).prop_map(move |v| {
            v.into_iter()
                .map(|(x, y, w, h)| BBox2D::new(x, y, x + w, y + h, ch))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn partition_and_containment(
            rgb in arb_boxes(Channel::Rgb),
            stereo in arb_boxes(Channel::Stereo),
            thr in 0.0f64..80.0,
        ) {
            let dets = fuse_by_center_nms(&rgb, &stereo, thr);
            prop_assert!(dets.len() <= rgb.len() + stereo.len());
            // Each input is covered by a detection containing it.
            for b in rgb.iter().chain(&stereo) {
                prop_assert!(dets.iter().any(|d| d.bbox.contains(b) && d.sources.contains(&b.channel)));
            }
            for d in &dets {
                prop_assert!(!d.sources.is_empty());
            }
            let zero = fuse_by_center_nms(&rgb, &stereo, 0.0);
            prop_assert_eq!(zero.len(), rgb.len() + stereo.len());
        }

        #[test]
        fn swapping_channels_keeps_merged_pairs(
            centers in proptest::collection::vec((0i32..8, 0i32..8), 1..8),
            jitter in proptest::collection::vec((-5i32..=5, -5i32..=5), 8),
        ) {
            // Well separated sites (>= 100 px apart), each with an rgb box and a
            // jittered stereo box; threshold 20 px.
            let mut sites: Vec<(i32, i32)> = centers.iter().map(|&(i, j)| (i * 100 + 50, j * 100 + 50)).collect();
            sites.sort();
            sites.dedup();
            let rgb: Vec<BBox2D> = sites.iter().map(|&(x, y)| around(x, y, 8, Channel::Rgb)).collect();
            let stereo: Vec<BBox2D> = sites
                .iter()
                .zip(&jitter)
                .map(|(&(x, y), &(dx, dy))| around(x + dx, y + dy, 10, Channel::Stereo))
                .collect();
            let a = fuse_by_center_nms(&rgb, &stereo, 20.0);
            let relabel = |v: &[BBox2D], ch| v.iter().map(|b| b.with_channel(ch)).collect::<Vec<_>>();
            let b = fuse_by_center_nms(&relabel(&stereo, Channel::Rgb), &relabel(&rgb, Channel::Stereo), 20.0);
            let boxes = |d: &[Detection]| {
                let mut v: Vec<(i32, i32, i32, i32)> = d.iter().map(|d| (d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max)).collect();
                v.sort();
                v
            };
            prop_assert_eq!(a.len(), sites.len());
            prop_assert_eq!(boxes(&a), boxes(&b));
        }
    }
}
