//! Planar (unrotated) surface-code lattice with an optional noisy seam column.
//!
//! Sites live on a `(2L-1) x (2L-1)` grid indexed by `(row, col)`. Sites with
//! `row + col` even are data qubits. Sites at (odd row, even col) are Z-type
//! checks, which detect bit flips; sites at (even row, odd col) are X-type
//! checks. Only the bit-flip sector is simulated, so the Z-type checks are the
//! "checks" of the matching problem.
//!
//! With this orientation the logical bit-flip operator runs down a column of
//! data qubits (top boundary to bottom boundary), and the logical parity
//! reference is a row crossing it. A seam column is an even, interior column:
//! it alternates data qubits and Z-type checks and runs parallel to the
//! logical bit-flip operator.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("code distance must be at least 2, got {0}")]
    InvalidDistance(usize),
    #[error("seam column {column} is not valid for distance {distance}: {reason}")]
    InvalidSeamColumn {
        column: usize,
        distance: usize,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteRole {
    Data,
    /// Detects bit flips; these are the nodes of the matching graph.
    ZCheck,
    XCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Bulk,
    SeamData,
    SeamSyndrome,
}

impl Region {
    pub fn is_seam(self) -> bool {
        !matches!(self, Region::Bulk)
    }
}

/// Grid coordinate `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

/// Immutable lattice description shared by the sampler and the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeLayout {
    distance: usize,
    seam_column: Option<usize>,
    roles: Vec<SiteRole>,
    regions: Vec<Region>,
    data: Vec<Coord>,
    checks: Vec<Coord>,
    data_checks: Vec<[Option<usize>; 2]>,
    logical_reference: Vec<usize>,
}

impl CodeLayout {
    /// Builds the layout for distance `distance`, optionally with a seam on
    /// grid column `seam_column`.
    pub fn new(distance: usize, seam_column: Option<usize>) -> Result<Self, GeometryError> {
        if distance < 2 {
            return Err(GeometryError::InvalidDistance(distance));
        }
        let size = 2 * distance - 1;
        if let Some(column) = seam_column {
            let invalid = |reason| GeometryError::InvalidSeamColumn {
                column,
                distance,
                reason,
            };
            if column == 0 || column + 1 >= size {
                return Err(invalid("column must lie strictly inside the lattice"));
            }
            if column % 2 == 1 {
                return Err(invalid(
                    "column must be even so it carries data qubits and bit-flip checks",
                ));
            }
        }

        let mut roles = Vec::with_capacity(size * size);
        let mut regions = Vec::with_capacity(size * size);
        let mut data = Vec::new();
        let mut checks = Vec::new();
        let mut check_index = vec![usize::MAX; size * size];
        for row in 0..size {
            for col in 0..size {
                let role = match ((row + col) % 2, row % 2) {
                    (0, _) => SiteRole::Data,
                    (_, 1) => SiteRole::ZCheck,
                    _ => SiteRole::XCheck,
                };
                let region = match (seam_column == Some(col), role) {
                    (true, SiteRole::Data) => Region::SeamData,
                    (true, SiteRole::ZCheck) => Region::SeamSyndrome,
                    _ => Region::Bulk,
                };
                match role {
                    SiteRole::Data => data.push(Coord { row, col }),
                    SiteRole::ZCheck => {
                        check_index[row * size + col] = checks.len();
                        checks.push(Coord { row, col });
                    }
                    SiteRole::XCheck => {}
                }
                roles.push(role);
                regions.push(region);
            }
        }

        let data_checks = data
            .iter()
            .map(|&Coord { row, col }| {
                let lookup = |r: usize, c: usize| Some(check_index[r * size + c]);
                if row % 2 == 0 {
                    // Vertical edge between the checks above and below.
                    let up = if row > 0 { lookup(row - 1, col) } else { None };
                    let down = if row + 1 < size { lookup(row + 1, col) } else { None };
                    match (up, down) {
                        (Some(a), b) => [Some(a), b],
                        (None, b) => [b, None],
                    }
                } else {
                    // Horizontal edge between the checks left and right.
                    [lookup(row, col - 1), lookup(row, col + 1)]
                }
            })
            .collect();

        let logical_reference = data
            .iter()
            .enumerate()
            .filter(|(_, c)| c.row == 0)
            .map(|(i, _)| i)
            .collect();

        Ok(Self {
            distance,
            seam_column,
            roles,
            regions,
            data,
            checks,
            data_checks,
            logical_reference,
        })
    }

    /// The column at the centre of the lattice, always a valid seam for `L >= 3`.
    pub fn central_seam_column(distance: usize) -> Option<usize> {
        let col = distance - 1;
        let col = if col % 2 == 1 { col + 1 } else { col };
        (col > 0 && col + 1 < 2 * distance - 1).then_some(col)
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn seam_column(&self) -> Option<usize> {
        self.seam_column
    }

    /// Side length of the square site grid, `2L - 1`.
    pub fn size(&self) -> usize {
        2 * self.distance - 1
    }

    pub fn num_sites(&self) -> usize {
        self.roles.len()
    }

    pub fn num_data(&self) -> usize {
        self.data.len()
    }

    /// Number of bit-flip (Z-type) checks.
    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn num_x_checks(&self) -> usize {
        self.roles.iter().filter(|r| **r == SiteRole::XCheck).count()
    }

    pub fn role(&self, coord: Coord) -> SiteRole {
        self.roles[coord.row * self.size() + coord.col]
    }

    pub fn region(&self, coord: Coord) -> Region {
        self.regions[coord.row * self.size() + coord.col]
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn data_coord(&self, data: usize) -> Coord {
        self.data[data]
    }

    pub fn check_coord(&self, check: usize) -> Coord {
        self.checks[check]
    }

    pub fn data_region(&self, data: usize) -> Region {
        self.region(self.data[data])
    }

    pub fn check_region(&self, check: usize) -> Region {
        self.region(self.checks[check])
    }

    /// The bit-flip checks touched by a data qubit. A data qubit on the top or
    /// bottom row touches a single check; the second slot is then `None`.
    pub fn data_checks(&self, data: usize) -> [Option<usize>; 2] {
        self.data_checks[data]
    }

    /// Data qubits whose combined bit-flip parity reveals a logical flip: the
    /// top row, which every top-to-bottom bit-flip string crosses once.
    pub fn logical_reference(&self) -> &[usize] {
        &self.logical_reference
    }

    /// Data qubits on the seam column, top to bottom.
    pub fn seam_data(&self) -> Vec<usize> {
        (0..self.num_data())
            .filter(|&d| self.data_region(d) == Region::SeamData)
            .collect()
    }

    pub fn region_count(&self, region: Region) -> usize {
        self.regions.iter().filter(|r| **r == region).count()
    }

    pub fn to_json(&self) -> LayoutJson {
        LayoutJson {
            distance: self.distance,
            seam_column: self.seam_column,
            orientation: "x_logical_along_columns",
            size: self.size(),
            roles: self.roles.clone(),
            regions: self.regions.clone(),
        }
    }
}

/// Debug/golden-test view of a layout. Role and region arrays are row-major.
#[derive(Debug, Clone, Serialize)]
pub struct LayoutJson {
    pub distance: usize,
    pub seam_column: Option<usize>,
    pub orientation: &'static str,
    pub size: usize,
    pub roles: Vec<SiteRole>,
    pub regions: Vec<Region>,
}

/// Convenience wrapper matching the builder used by the CLI.
pub fn build_layout(distance: usize, seam_column: Option<usize>) -> Result<CodeLayout, GeometryError> {
    CodeLayout::new(distance, seam_column)
}
