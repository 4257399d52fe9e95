//! Run configuration: defaults, then a config file, then command-line flags.
//!
//! Every key is set from its string form, so a `key = value` file, a flag and
//! the `config` object echoed into JSON output all go through [`RunConfig::set`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use kgband::{CutoffShape, ModelParams};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// `(key, help)` for every configuration key. Flags are `--key-with-dashes`.
pub const KEYS: &[(&str, &str)] = &[
    ("lambda", "cutoff in Compton units, in (0,1)"),
    ("dimension", "spatial dimension 1..=3"),
    ("shape", "band shape for n >= 2: box | sphere"),
    ("smearing", "sample_point | tabulated"),
    ("table", "tabulated smearing file: lines `k re im`"),
    ("center", "smearing center along the first axis"),
    ("separation", "pair separation in lattice spacings"),
    ("modes", "1 (single smearing) or 2 (pair)"),
    ("frequency", "effective frequency: moment_ratio | compton"),
    ("quantity", "sweep quantity: nu_excess | e_n | entropy | temperature | d_phi2 | d_pi2 | beta_density"),
    ("lambda_geom", "geometric sweep grid lo:hi:count"),
    ("chain_sites", "oracle chain sites M"),
    ("spacing", "oracle chain spacing a"),
    ("half_width", "oracle sampling window half-width"),
    ("taper", "oracle window taper width"),
    ("convergence", "oracle: also fit the order in a (true | false)"),
    ("spacings", "oracle convergence spacings, comma separated"),
    ("length", "oracle convergence chain length L = Ma"),
    ("pair_sites", "sites of the discretized Bogoliubov pair"),
    ("n_max", "occupation cap of the truncated Fock check"),
    ("site_counts", "inequivalence site counts, comma separated"),
    ("tolerance", "requested accuracy for checks"),
    ("offset", "sampling lattice offset in [0,1)"),
    ("window_radius", "sample window radius for sampled states"),
    ("input", "sample record file to load"),
    ("record_out", "write the sampled state as a record file"),
    ("points", "evaluation points, comma separated"),
    ("region_lo", "POVM region lower end (default -a)"),
    ("region_hi", "POVM region upper end (default a)"),
    ("povm_window", "lattice window radius for the POVM matrix"),
    ("time", "evolution time"),
    ("packet", "wave packet: cosine | boxcar"),
    ("format", "json | csv"),
    ("output", "output path (default stdout)"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Moments,
    Symplectic,
    Entropy,
    Negativity,
    Temperature,
    Sweep,
    Oracle,
    BogoliubovCheck,
    Reconstruct,
    Povm,
    Evolve,
}

impl Command {
    pub const ALL: [(Command, &'static str, &'static str); 11] = [
        (Command::Moments, "moments", "smeared vacuum second moments"),
        (Command::Symplectic, "symplectic", "symplectic spectrum of the smeared covariance"),
        (Command::Entropy, "entropy", "von Neumann entropy of the smeared modes"),
        (Command::Negativity, "negativity", "logarithmic negativity of a sample-point pair"),
        (Command::Temperature, "temperature", "effective temperature of a single reduced mode"),
        (Command::Sweep, "sweep", "quantity over a geometric cutoff grid, with power-law fit"),
        (Command::Oracle, "oracle", "harmonic-chain reference against the continuum"),
        (Command::BogoliubovCheck, "bogoliubov-check", "validity, Fock vacuum and inequivalence checks"),
        (Command::Reconstruct, "reconstruct", "sinc reconstruction of a sampled state"),
        (Command::Povm, "povm", "position POVM probability and non-idempotency"),
        (Command::Evolve, "evolve", "exact vs non-relativistic wave-packet evolution"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(c, _, _)| *c == self).unwrap().1
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n, _)| *n == name).map(|(c, _, _)| *c)
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!("must be one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

keyword_enum!(SmearingKind { SamplePoint => "sample_point", Tabulated => "tabulated" });
keyword_enum!(Frequency { MomentRatio => "moment_ratio", Compton => "compton" });
keyword_enum!(Quantity {
    NuExcess => "nu_excess",
    LogNegativity => "e_n",
    Entropy => "entropy",
    Temperature => "temperature",
    DPhi2 => "d_phi2",
    DPi2 => "d_pi2",
    BetaDensity => "beta_density",
});
keyword_enum!(Packet { Cosine => "cosine", Boxcar => "boxcar" });
keyword_enum!(Format { Json => "json", Csv => "csv" });

/// Geometric grid `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    /// Points in increasing order.
    pub fn points(&self) -> Vec<f64> {
        let (lo, hi) = if self.lo <= self.hi { (self.lo, self.hi) } else { (self.hi, self.lo) };
        if self.count == 1 {
            return vec![lo];
        }
        let step = (hi / lo).ln() / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { hi } else { lo * (step * i as f64).exp() })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err("must have the form lo:hi:count".into());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower end {lo:?}"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper end {hi:?}"))?;
        let count: usize = n.trim().parse().map_err(|_| format!("bad count {n:?}"))?;
        if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err("ends must be positive and finite".into());
        }
        if count == 0 {
            return Err("count must be positive".into());
        }
        Ok(Self { lo, hi, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.lo, self.hi, self.count)
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn serialize_shape<S: serde::Serializer>(shape: &CutoffShape, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(shape)
}

/// Fully resolved configuration, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub lambda: f64,
    pub dimension: usize,
    #[serde(serialize_with = "serialize_shape")]
    pub shape: CutoffShape,
    pub smearing: SmearingKind,
    pub table: Option<String>,
    pub center: f64,
    pub separation: i64,
    pub modes: usize,
    pub frequency: Frequency,
    pub quantity: Quantity,
    pub lambda_geom: Grid,
    pub chain_sites: usize,
    pub spacing: f64,
    pub half_width: f64,
    pub taper: f64,
    pub convergence: bool,
    pub spacings: Vec<f64>,
    pub length: f64,
    pub pair_sites: usize,
    pub n_max: usize,
    pub site_counts: Vec<usize>,
    pub tolerance: f64,
    pub offset: f64,
    pub window_radius: i64,
    pub input: Option<String>,
    pub record_out: Option<String>,
    pub points: Vec<f64>,
    pub region_lo: Option<f64>,
    pub region_hi: Option<f64>,
    pub povm_window: i64,
    pub time: f64,
    pub packet: Packet,
    pub format: Format,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            lambda: 0.1,
            dimension: 1,
            shape: CutoffShape::Box,
            smearing: SmearingKind::SamplePoint,
            table: None,
            center: 0.0,
            separation: 1,
            modes: if command == Command::Negativity { 2 } else { 1 },
            frequency: Frequency::MomentRatio,
            quantity: Quantity::NuExcess,
            lambda_geom: Grid {
                lo: 1e-3,
                hi: 1e-1,
                count: 13,
            },
            chain_sites: 8192,
            spacing: 0.02,
            half_width: 5000.0,
            taper: 500.0,
            convergence: false,
            spacings: vec![0.16, 0.08, 0.04, 0.02],
            length: 163.84,
            pair_sites: 2,
            n_max: 12,
            site_counts: vec![16, 32, 64, 128],
            tolerance: 1e-8,
            offset: 0.0,
            window_radius: 512,
            input: None,
            record_out: None,
            points: Vec::new(),
            region_lo: None,
            region_hi: None,
            povm_window: 40,
            time: 100.0,
            packet: Packet::Cosine,
            format: Format::Json,
            output: None,
        }
    }

    /// Sets one key from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        let bad = |msg: String| CliError::Config(format!("{key} {msg}"));
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("has unparseable value {v:?}"))
        }
        fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
            v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(s.trim())).collect()
        }
        fn opt(v: &str) -> Option<String> {
            (!v.is_empty()).then(|| v.to_string())
        }
        fn opt_num(v: &str) -> Result<Option<f64>, String> {
            if v.is_empty() { Ok(None) } else { num(v).map(Some) }
        }
        match key {
            "command" => {
                let c = Command::from_name(&v.replace('_', "-")).ok_or_else(|| bad("is not a known command".into()))?;
                if c != self.command {
                    return Err(bad(format!("is {} but the run is {}", c.name(), self.command.name())));
                }
            }
            "lambda" => self.lambda = num(v).map_err(bad)?,
            "dimension" => self.dimension = num(v).map_err(bad)?,
            "shape" => self.shape = v.parse().map_err(|_| bad("must be box or sphere".into()))?,
            "smearing" => self.smearing = v.parse().map_err(bad)?,
            "table" => self.table = opt(v),
            "center" => self.center = num(v).map_err(bad)?,
            "separation" => self.separation = num(v).map_err(bad)?,
            "modes" => self.modes = num(v).map_err(bad)?,
            "frequency" => self.frequency = v.parse().map_err(bad)?,
            "quantity" => self.quantity = v.parse().map_err(bad)?,
            "lambda_geom" => self.lambda_geom = v.parse().map_err(bad)?,
            "chain_sites" => self.chain_sites = num(v).map_err(bad)?,
            "spacing" => self.spacing = num(v).map_err(bad)?,
            "half_width" => self.half_width = num(v).map_err(bad)?,
            "taper" => self.taper = num(v).map_err(bad)?,
            "convergence" => self.convergence = num(v).map_err(bad)?,
            "spacings" => self.spacings = list(v).map_err(bad)?,
            "length" => self.length = num(v).map_err(bad)?,
            "pair_sites" => self.pair_sites = num(v).map_err(bad)?,
            "n_max" => self.n_max = num(v).map_err(bad)?,
            "site_counts" => self.site_counts = list(v).map_err(bad)?,
            "tolerance" => self.tolerance = num(v).map_err(bad)?,
            "offset" => self.offset = num(v).map_err(bad)?,
            "window_radius" => self.window_radius = num(v).map_err(bad)?,
            "input" => self.input = opt(v),
            "record_out" => self.record_out = opt(v),
            "points" => self.points = list(v).map_err(bad)?,
            "region_lo" => self.region_lo = opt_num(v).map_err(bad)?,
            "region_hi" => self.region_hi = opt_num(v).map_err(bad)?,
            "povm_window" => self.povm_window = num(v).map_err(bad)?,
            "time" => self.time = num(v).map_err(bad)?,
            "packet" => self.packet = v.parse().map_err(bad)?,
            "format" => self.format = v.parse().map_err(bad)?,
            "output" => self.output = opt(v),
            _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file: either `key = value` lines or a JSON object,
    /// whose `config` member is used when present (an earlier run's output).
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let json: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))?;
            let obj = json.get("config").unwrap_or(&json);
            let Value::Object(map) = obj else {
                return Err(CliError::Config("config JSON must be an object".into()));
            };
            for (k, v) in map {
                let text = match v {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(","),
                    other => scalar_text(other),
                };
                self.set(k, &text)?;
            }
            return Ok(());
        }
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Domain checks for every numeric field, run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: &str| Err(CliError::Config(format!("{field} {msg}")));
        self.params()?;
        for l in self.lambda_geom.points() {
            ModelParams::new(self.dimension, l, self.shape).map_err(|e| CliError::Config(format!("lambda_geom: {e}")))?;
        }
        if !self.center.is_finite() {
            return fail("center", "must be finite");
        }
        if !(1..=2).contains(&self.modes) {
            return fail("modes", "must be 1 or 2");
        }
        if self.chain_sites == 0 {
            return fail("chain_sites", "must be positive");
        }
        for (name, v) in [("spacing", self.spacing), ("half_width", self.half_width), ("length", self.length)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(name, "must be positive and finite");
            }
        }
        if !(self.taper >= 0.0 && self.taper < self.half_width) {
            return fail("taper", "must lie in [0, half_width)");
        }
        if self.spacings.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return fail("spacings", "must be positive");
        }
        if self.pair_sites < 2 {
            return fail("pair_sites", "must be at least 2");
        }
        if self.n_max < 4 {
            return fail("n_max", "must be at least 4");
        }
        if !(self.tolerance > 0.0) {
            return fail("tolerance", "must be positive");
        }
        if !(0.0..1.0).contains(&self.offset) {
            return fail("offset", "must lie in [0,1)");
        }
        if self.window_radius < 1 || self.povm_window < 1 {
            return fail("window_radius", "must be positive");
        }
        if self.points.iter().any(|x| !x.is_finite()) {
            return fail("points", "must be finite");
        }
        if let (Some(lo), Some(hi)) = (self.region_lo, self.region_hi) {
            if !(lo <= hi) {
                return fail("region_lo", "must not exceed region_hi");
            }
        }
        if !self.time.is_finite() {
            return fail("time", "must be finite");
        }
        if self.smearing == SmearingKind::Tabulated && self.table.is_none() {
            return fail("table", "is required for a tabulated smearing");
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.dimension, self.lambda, self.shape).map_err(CliError::from_config)
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
