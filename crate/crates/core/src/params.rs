//! The discrete parameter space of the game and the operators every
//! optimizer shares: random initialisation, single-gene mutation and
//! 1-neighbourhood sampling.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::agents::AgentId;
use crate::{Error, Result, Rng};

pub const MISSILE_MAX_SPEED: usize = 0;
pub const MISSILE_COOLDOWN: usize = 1;
pub const MISSILE_RADIUS: usize = 2;
pub const MISSILE_MAX_TTL: usize = 3;
pub const GRID_SIZE: usize = 4;
/// First of the 16 row-major black-hole cell genes.
pub const BLACKHOLE_CELL_FIRST: usize = 5;
pub const BLACKHOLE_CELLS: usize = 16;
pub const BLACKHOLE_RADIUS: usize = 21;
pub const BLACKHOLE_FORCE: usize = 22;
pub const BLACKHOLE_PENALTY: usize = 23;
pub const SAFE_ZONE: usize = 24;
pub const BOMB_RADIUS: usize = 25;
pub const MISSILE_TYPE: usize = 26;
pub const RESOURCE_TTL: usize = 27;
pub const RESOURCE_COOLDOWN: usize = 28;
pub const ENEMY_ID: usize = 29;
pub const GENE_COUNT: usize = 30;

pub fn is_cell_gene(g: usize) -> bool {
    (BLACKHOLE_CELL_FIRST..BLACKHOLE_CELL_FIRST + BLACKHOLE_CELLS).contains(&g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSpec {
    pub name: String,
    pub values: Vec<f64>,
}

impl GeneSpec {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// Inclusive arithmetic range `lo, lo+step, ..., hi`.
    pub fn range(name: impl Into<String>, lo: i64, hi: i64, step: i64) -> Self {
        let values = (lo..=hi).step_by(step as usize).map(|v| v as f64).collect();
        Self::new(name, values)
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }
}

/// An ordered list of discrete genes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    genes: Vec<GeneSpec>,
}

impl SearchSpace {
    /// Builds a space, rejecting genes with fewer than two levels or
    /// non-increasing value lists.
    pub fn new(genes: Vec<GeneSpec>) -> Result<Self> {
        if genes.is_empty() {
            return Err(Error::Config("search space has no genes".into()));
        }
        for g in &genes {
            if g.arity() < 2 || g.arity() > usize::from(u8::MAX) {
                return Err(Error::Config(format!("gene {} has arity {}", g.name, g.arity())));
            }
            if g.values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!("gene {} values not strictly increasing", g.name)));
            }
        }
        Ok(Self { genes })
    }

    /// Space with the given arities and values `0..arity`; handy for small
    /// synthetic problems.
    pub fn with_arities(arities: &[usize]) -> Result<Self> {
        Self::new(
            arities
                .iter()
                .enumerate()
                .map(|(i, &a)| GeneSpec::new(format!("G{i}"), (0..a).map(|v| v as f64).collect()))
                .collect(),
        )
    }

    pub fn genes(&self) -> &[GeneSpec] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn arity(&self, gene: usize) -> usize {
        self.genes[gene].arity()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.genes.iter().map(GeneSpec::arity).collect()
    }

    /// Number of points in the space.
    pub fn cardinality(&self) -> u128 {
        self.genes.iter().map(|g| g.arity() as u128).product()
    }

    /// Size of the 1-neighbourhood of any point: the sum of `arity - 1`.
    pub fn neighbourhood_size(&self) -> usize {
        self.genes.iter().map(|g| g.arity() - 1).sum()
    }

    pub fn value(&self, gene: usize, level: u8) -> f64 {
        self.genes[gene].values[usize::from(level)]
    }

    pub fn validate(&self, genome: &Genome) -> Result<()> {
        if genome.len() != self.len() {
            return Err(Error::InvalidGenome(format!(
                "expected {} levels, got {}",
                self.len(),
                genome.len()
            )));
        }
        for (g, (&level, spec)) in genome.levels.iter().zip(&self.genes).enumerate() {
            if usize::from(level) >= spec.arity() {
                return Err(Error::InvalidGenome(format!(
                    "gene {g} ({}) level {level} >= arity {}",
                    spec.name,
                    spec.arity()
                )));
            }
        }
        Ok(())
    }

    /// Level whose value equals `value`, if any.
    pub fn level_of(&self, gene: usize, value: f64) -> Option<u8> {
        self.genes[gene]
            .values
            .iter()
            .position(|&v| v == value)
            .map(|i| i as u8)
    }
}

/// The 30-gene space of Space Battle Evolved parameters.
pub fn default_search_space() -> SearchSpace {
    let mut genes = vec![
        GeneSpec::range("MISSILE_MAX_SPEED", 1, 10, 1),
        GeneSpec::range("MISSILE_COOLDOWN", 1, 9, 1),
        GeneSpec::range("MISSILE_RADIUS", 2, 10, 2),
        GeneSpec::range("MISSILE_MAX_TTL", 40, 160, 20),
        GeneSpec::range("GRID_SIZE", 1, 4, 1),
    ];
    for row in 1..=4 {
        for col in 1..=4 {
            genes.push(GeneSpec::range(format!("BLACKHOLE_CELL({row},{col})"), 0, 1, 1));
        }
    }
    genes.extend([
        GeneSpec::range("BLACKHOLE_RADIUS", 25, 200, 25),
        GeneSpec::range("BLACKHOLE_FORCE", 0, 3, 1),
        GeneSpec::range("BLACKHOLE_PENALTY", 0, 9, 1),
        GeneSpec::range("SAFE_ZONE", 0, 20, 10),
        GeneSpec::range("BOMB_RADIUS", 10, 50, 10),
        GeneSpec::range("MISSILE_TYPE", 0, 2, 1),
        GeneSpec::range("RESOURCE_TTL", 400, 600, 100),
        GeneSpec::range("RESOURCE_COOLDOWN", 200, 300, 50),
        GeneSpec::range("ENEMY_ID", 0, 5, 1),
    ]);
    SearchSpace::new(genes).expect("default space is well formed")
}

/// A point in a [`SearchSpace`]: one level index per gene.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Genome {
    pub levels: Vec<u8>,
}

impl Genome {
    pub fn new(levels: Vec<u8>) -> Self {
        Self { levels }
    }

    pub fn zeros(space: &SearchSpace) -> Self {
        Self::new(vec![0; space.len()])
    }

    pub fn maxed(space: &SearchSpace) -> Self {
        Self::new(space.arities().iter().map(|&a| (a - 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn hamming(&self, other: &Genome) -> usize {
        self.levels.iter().zip(&other.levels).filter(|(a, b)| a != b).count()
            + self.levels.len().abs_diff(other.levels.len())
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.levels.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let levels = s
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u8>()
                    .map_err(|e| Error::Parse(format!("genome level {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Genome::new(levels))
    }
}

pub fn random_genome(space: &SearchSpace, rng: &mut Rng) -> Genome {
    Genome::new(
        space
            .genes()
            .iter()
            .map(|g| rng.random_range(0..g.arity()) as u8)
            .collect(),
    )
}

/// Changes exactly one gene to a different level drawn uniformly from the
/// other `arity - 1` levels. The gene is `forced_gene` when given, otherwise
/// uniform over all genes.
pub fn mutate(genome: &Genome, space: &SearchSpace, rng: &mut Rng, forced_gene: Option<usize>) -> Result<Genome> {
    let gene = match forced_gene {
        Some(g) if g >= space.len() => {
            return Err(Error::GeneOutOfRange {
                index: g,
                len: space.len(),
            })
        }
        Some(g) => g,
        None => rng.random_range(0..space.len()),
    };
    let mut out = genome.clone();
    out.levels[gene] = other_level(genome.levels[gene], space.arity(gene), rng);
    Ok(out)
}

fn other_level(current: u8, arity: usize, rng: &mut Rng) -> u8 {
    // draw from arity-1 slots and skip over the current level
    let pick = rng.random_range(0..arity - 1) as u8;
    if pick >= current {
        pick + 1
    } else {
        pick
    }
}

/// Up to `k` distinct genomes at Hamming distance 1 from `genome`. When the
/// whole 1-neighbourhood has at most `k` members it is returned in full.
pub fn neighbours(genome: &Genome, space: &SearchSpace, k: usize, rng: &mut Rng) -> Vec<Genome> {
    let total = space.neighbourhood_size();
    if k >= total {
        let mut all = Vec::with_capacity(total);
        for (g, spec) in space.genes().iter().enumerate() {
            for level in 0..spec.arity() as u8 {
                if level != genome.levels[g] {
                    let mut n = genome.clone();
                    n.levels[g] = level;
                    all.push(n);
                }
            }
        }
        return all;
    }
    let mut seen = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let gene = rng.random_range(0..space.len());
        let mut n = genome.clone();
        n.levels[gene] = other_level(genome.levels[gene], space.arity(gene), rng);
        if seen.insert(n.clone()) {
            out.push(n);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissileType {
    Normal,
    Twin,
    Bomb,
}

impl MissileType {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Self::Normal),
            1 => Some(Self::Twin),
            2 => Some(Self::Bomb),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

/// Decoded game configuration; one field per gene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    pub missile_max_speed: f64,
    pub missile_cooldown: u32,
    pub missile_radius: f64,
    pub missile_max_ttl: u32,
    pub grid_size: usize,
    pub blackhole_cells: [bool; BLACKHOLE_CELLS],
    pub blackhole_radius: f64,
    pub blackhole_force: f64,
    pub blackhole_penalty: f64,
    pub safe_zone: f64,
    pub bomb_radius: f64,
    pub missile_type: MissileType,
    pub resource_ttl: u32,
    pub resource_cooldown: u32,
    pub enemy: AgentId,
}

impl GameParams {
    /// Cells actually placed on the map: the first `grid_size²` cell genes,
    /// read row-major on a `grid_size × grid_size` grid.
    pub fn expressed_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.grid_size;
        (0..n * n)
            .filter(move |&i| self.blackhole_cells[i])
            .map(move |i| (i / n, i % n))
    }

    /// A fixed mid-range configuration used for agent sanity checks: median
    /// level of every scalar gene, a 2×2 grid with two diagonal black holes.
    pub fn mid_range() -> Self {
        let space = default_search_space();
        let mut levels: Vec<u8> = space.arities().iter().map(|&a| ((a - 1) / 2) as u8).collect();
        levels[BLACKHOLE_CELL_FIRST..BLACKHOLE_CELL_FIRST + BLACKHOLE_CELLS].fill(0);
        levels[GRID_SIZE] = 1;
        levels[BLACKHOLE_CELL_FIRST] = 1;
        levels[BLACKHOLE_CELL_FIRST + 3] = 1;
        levels[MISSILE_TYPE] = 0;
        decode(&Genome::new(levels), &space).expect("mid-range genome is valid")
    }

    /// Inverse of [`decode`] against the default space.
    pub fn encode(&self) -> Result<Genome> {
        let space = default_search_space();
        let mut values = vec![
            self.missile_max_speed,
            f64::from(self.missile_cooldown),
            self.missile_radius,
            f64::from(self.missile_max_ttl),
            self.grid_size as f64,
        ];
        values.extend(self.blackhole_cells.iter().map(|&c| if c { 1.0 } else { 0.0 }));
        values.extend([
            self.blackhole_radius,
            self.blackhole_force,
            self.blackhole_penalty,
            self.safe_zone,
            self.bomb_radius,
            f64::from(self.missile_type.index()),
            f64::from(self.resource_ttl),
            f64::from(self.resource_cooldown),
            f64::from(self.enemy.index()),
        ]);
        let levels = values
            .iter()
            .enumerate()
            .map(|(g, &v)| {
                space.level_of(g, v).ok_or_else(|| {
                    Error::InvalidGenome(format!("{} = {v} is not a legal value", space.genes()[g].name))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Genome::new(levels))
    }

    /// Flat `NAME=value` map keyed by parameter names.
    pub fn to_key_values(&self) -> BTreeMap<String, String> {
        let space = default_search_space();
        let genome = self.encode().expect("decoded params always re-encode");
        space
            .genes()
            .iter()
            .zip(&genome.levels)
            .map(|(spec, &l)| (spec.name.clone(), format_value(spec.values[usize::from(l)])))
            .collect()
    }

    /// Text form of [`GameParams::to_key_values`] in gene order, one pair per line.
    pub fn to_text(&self) -> String {
        let space = default_search_space();
        let kv = self.to_key_values();
        space
            .genes()
            .iter()
            .map(|g| format!("{}={}\n", g.name, kv[&g.name]))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let space = default_search_space();
        let mut map = BTreeMap::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected NAME=value, got {line:?}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let levels = space
            .genes()
            .iter()
            .enumerate()
            .map(|(g, spec)| {
                let raw = map
                    .get(&spec.name)
                    .ok_or_else(|| Error::Parse(format!("missing parameter {}", spec.name)))?;
                let v: f64 = raw.parse().map_err(|e| Error::Parse(format!("{}: {e}", spec.name)))?;
                space
                    .level_of(g, v)
                    .ok_or_else(|| Error::InvalidGenome(format!("{} = {v} is not a legal value", spec.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        decode(&Genome::new(levels), &space)
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Looks up each gene's value. The space must have the default 30-gene layout.
pub fn decode(genome: &Genome, space: &SearchSpace) -> Result<GameParams> {
    if space.len() != GENE_COUNT {
        return Err(Error::InvalidGenome(format!(
            "game parameters need a {GENE_COUNT}-gene space, got {}",
            space.len()
        )));
    }
    space.validate(genome)?;
    let v = |g: usize| space.value(g, genome.levels[g]);
    let mut cells = [false; BLACKHOLE_CELLS];
    for (i, c) in cells.iter_mut().enumerate() {
        *c = v(BLACKHOLE_CELL_FIRST + i) != 0.0;
    }
    let missile_type =
        MissileType::from_index(v(MISSILE_TYPE) as u8).ok_or_else(|| Error::InvalidGenome("missile type".into()))?;
    let enemy = AgentId::from_index(v(ENEMY_ID) as u8)?;
    Ok(GameParams {
        missile_max_speed: v(MISSILE_MAX_SPEED),
        missile_cooldown: v(MISSILE_COOLDOWN) as u32,
        missile_radius: v(MISSILE_RADIUS),
        missile_max_ttl: v(MISSILE_MAX_TTL) as u32,
        grid_size: v(GRID_SIZE) as usize,
        blackhole_cells: cells,
        blackhole_radius: v(BLACKHOLE_RADIUS),
        blackhole_force: v(BLACKHOLE_FORCE),
        blackhole_penalty: v(BLACKHOLE_PENALTY),
        safe_zone: v(SAFE_ZONE),
        bomb_radius: v(BOMB_RADIUS),
        missile_type,
        resource_ttl: v(RESOURCE_TTL) as u32,
        resource_cooldown: v(RESOURCE_COOLDOWN) as u32,
        enemy,
    })
}
