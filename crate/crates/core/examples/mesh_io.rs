//! Build a half-disk, check it, write it in the text format and read it back.

use sloshlab::geometry::{build_half_disk, read_mesh, validate_mesh, write_mesh, Tag};

fn main() -> sloshlab::Result<()> {
    let mesh = build_half_disk(8, 32)?;
    let report = validate_mesh(&mesh);
    println!("valid: {}", report.is_valid());
    println!(
        "area {:.5} (pi/2 = {:.5}), |S| = {:.5}, |W| = {:.5}, {} interface vertices",
        mesh.area(),
        std::f64::consts::FRAC_PI_2,
        mesh.boundary_length(Some(Tag::S)),
        mesh.boundary_length(Some(Tag::W)),
        mesh.interface_vertices().len()
    );
    let text = write_mesh(&mesh);
    println!("{}", text.lines().take(3).collect::<Vec<_>>().join("\n"));
    let back = read_mesh(&text)?;
    println!("round trip preserves the mesh id: {}", back.id() == mesh.id());
    Ok(())
}
