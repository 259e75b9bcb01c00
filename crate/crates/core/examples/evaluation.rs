//! SEG, DET and OP_CSB on hand-built label maps, including the matching events
//! behind DET.

use cellseg::metrics::{evaluate_frames, op_csb, MatchTable};
use cellseg::raster::LabelMap;

fn squares() -> LabelMap {
    LabelMap::from_fn(40, 20, |x, y| if x % 10 < 8 && y % 10 < 8 { (x / 10 + 4 * (y / 10) + 1) as u32 } else { 0 })
}

fn main() -> cellseg::Result<()> {
    let truth = squares();
    let cases = [
        ("perfect", truth.clone()),
        ("one missed", truth.map(|&l| if l == 8 { 0 } else { l })),
        ("two merged", truth.map(|&l| if l == 2 { 1 } else { l })),
        ("eroded by one row", LabelMap::from_fn(40, 20, |x, y| if y % 10 == 0 { 0 } else { truth.get(x, y) })),
        ("shifted by two", LabelMap::from_fn(40, 20, |x, y| if x >= 2 { truth.get(x - 2, y) } else { 0 })),
    ];
    println!("{:<18} {:>6} {:>6} {:>6}  events", "segmentation", "SEG", "DET", "OP_CSB");
    for (name, result) in cases {
        let report = evaluate_frames(&[(truth.clone(), result.clone())])?;
        let e = report.det_event_counts;
        println!(
            "{name:<18} {:>6.3} {:>6.3} {:>6.3}  fn={} fp={} ns={}",
            report.seg, report.det, report.op_csb, e.missed, e.spurious, e.splits
        );
        let table = MatchTable::build(&truth, &result)?;
        let unmatched: Vec<u32> = table.references.iter().filter(|m| m.segment.is_none()).map(|m| m.label).collect();
        if !unmatched.is_empty() {
            println!("{:<18} unmatched references {unmatched:?}", "");
        }
    }
    println!("OP_CSB of SEG 0.863 and DET 0.961: {:.3}", op_csb(0.863, 0.961));
    Ok(())
}
