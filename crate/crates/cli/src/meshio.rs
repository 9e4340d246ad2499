//! Mesh and solution files.
//!
//! The mesh format is JSON: `{"vertices": [[x, y], ...], "cells": [[i, ...],
//! ...]}` with 0-based CCW vertex indices. Unknown keys are ignored on read;
//! numbers are written in shortest round-trip form, so save/load is
//! bit-exact and saving the same mesh twice yields byte-identical files.

use std::fs;
use std::path::Path;

use lvem_core::geometry::{Mesh, Point};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    cells: Vec<Vec<usize>>,
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> CliResult<()> {
    let file = MeshFile {
        vertices: mesh.vertices().iter().map(|p| [p.x, p.y]).collect(),
        cells: mesh.cells().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| CliError::validation(format!("mesh serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> CliResult<Mesh> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let file: MeshFile = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(format!(
            "malformed mesh file {}: {e}",
            path.display()
        ))
    })?;
    let vertices = file
        .vertices
        .iter()
        .map(|&[x, y]| Point::new(x, y))
        .collect();
    Mesh::new(vertices, file.cells).map_err(|e| {
        CliError::validation(format!("invalid mesh in {}: {e}", path.display()))
    })
}

#[derive(Serialize, Deserialize)]
pub struct SolutionFile {
    pub problem: String,
    pub backend: String,
    /// One value per mesh vertex, boundary vertices carry the Dirichlet data.
    pub dofs: Vec<f64>,
}

pub fn save_solution(sol: &SolutionFile, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(sol)
        .map_err(|e| CliError::validation(format!("solution serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
