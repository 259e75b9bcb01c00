//! Grayscale morphology on small rasters: h-domes, reconstruction, distance
//! transforms and inscribed diameters.

use cellseg::morphology::{distance_transform, geodesic_reconstruct, gray_open, hdome, max_inscribed_diameter, DiskSE};
use cellseg::raster::{BinaryMask, Connectivity, GrayImage};

fn show(name: &str, img: &GrayImage) {
    println!("{name}:");
    for y in 0..img.height() {
        let row: Vec<String> = img.row(y).iter().map(|v| format!("{v:5.1}")).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> cellseg::Result<()> {
    let signal = GrayImage::new(9, 1, vec![0.0, 4.0, 0.0, 6.0, 0.0, 2.0, 3.0, 2.0, 0.0])?;
    show("signal", &signal);
    show("h-dome, h = 3", &hdome(&signal, 3.0, Connectivity::Eight)?);

    let lowered = signal.map(|&v| (v - 3.0f32).max(0.0));
    show("reconstruction of (signal - 3) under signal", &geodesic_reconstruct(&lowered, &signal, Connectivity::Eight)?);

    // a disk of diameter 9 next to a 2-pixel-wide bar
    let cell = BinaryMask::from_fn(16, 11, |x, y| {
        let (dx, dy) = (x as f64 - 5.0, y as f64 - 5.0);
        dx * dx + dy * dy <= 20.25 || (x >= 12 && x < 14)
    });
    let dist = distance_transform(&cell.complement());
    show("distance to background", &dist);
    println!("max inscribed diameter: {}", max_inscribed_diameter(&cell)?);

    // the bar is narrower than the structuring element and disappears
    let se = DiskSE::new(5.0)?;
    let opened = gray_open(&cell.to_gray(), &se);
    println!("opening with a diameter-{} disk keeps {} of {} pixels", se.diameter(), opened.data().iter().filter(|&&v| v > 0.0).count(), cell.count());
    Ok(())
}
