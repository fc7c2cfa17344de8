//! Generates the built-in meshes, reports their quality and writes one to JSON.

use mptk::mesh::{generate_box_scene, generate_star_mesh, mesh_quality, save_mesh_json, BoxMeshOptions, BoxRegion, StarMeshOptions, StarShape};

fn main() -> mptk::Result<()> {
    let star = StarMeshOptions { core_divisions: 3, growth: 2.0, truncation_factor: 10.0 };
    let (coin, _) = StarShape::coin(0.01125, 3.15e-3);
    for (name, shape) in [("sphere", StarShape::Sphere), ("coin", coin), ("tetrahedron", StarShape::regular_tetrahedron())] {
        let mesh = generate_star_mesh(&shape, &star)?;
        let q = mesh_quality(&mesh)?;
        println!(
            "{name:>12}: {} tets, object volume {:.4} (exact {:.4}), dihedral {:.1}..{:.1} deg",
            q.tet_count,
            mesh.region_volume(1)?,
            shape.volume(),
            q.min_dihedral,
            q.max_dihedral
        );
    }
    // Two unit cubes sharing a face, tagged 1 and 2.
    let boxes = [
        BoxRegion { min: [-1.0, -0.5, -0.5], max: [0.0, 0.5, 0.5], tag: 1 },
        BoxRegion { min: [0.0, -0.5, -0.5], max: [1.0, 0.5, 0.5], tag: 2 },
    ];
    let mesh = generate_box_scene(&boxes, &BoxMeshOptions { truncation_factor: 10.0, h: 0.25, growth: 2.0 })?;
    println!("two cubes: {} tets, tags {:?}", mesh.n_tets(), mesh.region_tags());
    let path = std::env::temp_dir().join("two_cubes.json");
    save_mesh_json(&mesh, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
