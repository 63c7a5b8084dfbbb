use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use rbc_core::{FeedbackRates, GaussianRbcParams, RegionId, Scheme, Transcription};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Table1,
    Corner,
    Region,
    Project,
    Verify,
}

impl Command {
    fn parse(s: &str) -> Option<Command> {
        match s {
            "table1" => Some(Command::Table1),
            "corner" => Some(Command::Corner),
            "region" => Some(Command::Region),
            "project" => Some(Command::Project),
            "verify" => Some(Command::Verify),
            _ => None,
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Table1 | Command::Corner => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Liang,
    Scheme1,
    Wu,
    Cf,
}

impl Bound {
    fn parse(s: &str) -> Option<Bound> {
        match s {
            "liang" => Some(Bound::Liang),
            "scheme1" => Some(Bound::Scheme1),
            "wu" => Some(Bound::Wu),
            "cf" => Some(Bound::Cf),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bound::Liang => "liang",
            Bound::Scheme1 => "scheme1",
            Bound::Wu => "wu",
            Bound::Cf => "cf",
        })
    }
}

/// A validated run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub d: Vec<f64>,
    pub p: f64,
    pub p1: f64,
    pub rates: FeedbackRates,
    pub bound: Option<Bound>,
    pub wyner_ziv: bool,
    pub scheme: Option<Scheme>,
    pub region: Option<RegionId>,
    pub pmf: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub alphabet: usize,
    pub transcription: Transcription,
    pub tol: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn channel(&self, d: f64) -> rbc_core::Result<GaussianRbcParams> {
        Ok(GaussianRbcParams::from_position(d, self.p, self.p1)?.with_feedback(self.rates.rfb1, self.rates.rfb2))
    }
}

/// Values supplied on the command line; they override the document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

const KEYS: &[&str] = &[
    "command",
    "d",
    "P",
    "P1",
    "rfb1",
    "rfb2",
    "bound",
    "wyner_ziv",
    "scheme",
    "region",
    "pmf",
    "trials",
    "seed",
    "alphabet",
    "transcription",
    "tol",
    "format",
    "output",
];

struct Reader<'a> {
    map: &'a Map<String, Value>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn number(&mut self, key: &str) -> Option<f64> {
        match self.map.get(key)? {
            Value::Number(n) => n.as_f64(),
            _ => {
                self.errors.push(format!("`{key}` must be a number"));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<&str> {
        let map = self.map;
        match map.get(key)? {
            Value::String(s) => Some(s),
            _ => {
                self.errors.push(format!("`{key}` must be a string"));
                None
            }
        }
    }

    fn count(&mut self, key: &str) -> Option<u64> {
        match self.map.get(key)? {
            Value::Number(n) if n.as_u64().is_some() => n.as_u64(),
            _ => {
                self.errors.push(format!("`{key}` must be a nonnegative integer"));
                None
            }
        }
    }

    /// A feedback rate: a nonnegative number, or `null` / `"inf"` for no limit.
    fn rate(&mut self, key: &str) -> f64 {
        let v = match self.map.get(key) {
            None | Some(Value::Null) => return f64::INFINITY,
            Some(Value::String(s)) if s == "inf" => return f64::INFINITY,
            Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
            Some(_) => f64::NAN,
        };
        if v.is_nan() || v < 0.0 {
            self.errors.push(format!("`{key}` must be a nonnegative number, null or \"inf\""));
        }
        v
    }

    fn choice<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, allowed: &str) -> Option<T> {
        let s = self.string(key)?.to_string();
        let out = parse(&s);
        if out.is_none() {
            self.errors.push(format!("unknown {key} `{s}` (expected one of {allowed})"));
        }
        out
    }
}

/// Parses and validates a configuration document, reporting every problem
/// found. An empty document is treated as `{}`. Relative `pmf` and `output`
/// paths are resolved against `base`.
pub fn parse_config(text: &str, base: Option<&Path>, cli: &Overrides) -> Result<RunConfig, Vec<String>> {
    let value: Value = if text.trim().is_empty() {
        Value::Object(Map::new())
    } else {
        serde_json::from_str(text).map_err(|e| vec![format!("malformed config: {e}")])?
    };
    let Value::Object(map) = value else {
        return Err(vec!["config must be a JSON object".into()]);
    };
    let mut r = Reader { map: &map, errors: Vec::new() };
    for key in map.keys() {
        if !KEYS.contains(&key.as_str()) {
            r.errors.push(format!("unknown key `{key}`"));
        }
    }

    let from_doc = r.choice("command", Command::parse, "table1, corner, region, project, verify");
    let command = match (cli.command, from_doc) {
        (Some(a), Some(b)) if a != b => {
            r.errors.push(format!("command {a:?} on the command line conflicts with `command` {b:?} in the config"));
            Some(a)
        }
        (a, b) => a.or(b),
    };
    if command.is_none() && !map.contains_key("command") {
        r.errors.push("missing required field `command`".into());
    }

    let d = match map.get("d") {
        None => Vec::new(),
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for item in items {
                match item.as_f64() {
                    Some(x) if x == 0.0 || x == 1.0 => r.errors.push(format!("d must differ from 0 and 1 (got {x})")),
                    Some(x) if x.is_finite() => out.push(x),
                    _ => r.errors.push(format!("`d` entries must be numbers (got {item})")),
                }
            }
            if items.is_empty() {
                r.errors.push("`d` must not be empty".into());
            }
            out
        }
        Some(_) => {
            r.errors.push("`d` must be an array of numbers".into());
            Vec::new()
        }
    };

    let mut power = |key: &str, default: f64| {
        let v = r.number(key).unwrap_or(default);
        if v.is_nan() || v < 0.0 {
            r.errors.push(format!("`{key}` must be nonnegative (got {v})"));
        }
        v
    };
    let p = power("P", 5.0);
    let p1 = power("P1", 1.0);
    let rfb1 = r.rate("rfb1");
    let rfb2 = r.rate("rfb2");
    let bound = r.choice("bound", Bound::parse, "liang, scheme1, wu, cf");
    let wyner_ziv = match map.get("wyner_ziv") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            r.errors.push("`wyner_ziv` must be a boolean".into());
            false
        }
    };
    let scheme = r.string("scheme").map(str::to_string).and_then(|s| match Scheme::parse(&s) {
        Ok(s) => Some(s),
        Err(_) => {
            r.errors.push(format!("unknown scheme id `{s}` (expected scheme1, scheme2a or scheme2b)"));
            None
        }
    });
    let region = r.string("region").map(str::to_string).and_then(|s| match RegionId::parse(&s) {
        Ok(id) => Some(id),
        Err(_) => {
            r.errors.push(format!("unknown region `{s}`"));
            None
        }
    });
    let resolve = |p: &str| match base {
        Some(b) if Path::new(p).is_relative() => b.join(p),
        _ => PathBuf::from(p),
    };
    let pmf = r.string("pmf").map(resolve);
    let trials = cli.trials.or_else(|| r.count("trials").map(|t| t as usize)).unwrap_or(100);
    let seed = cli.seed.or_else(|| r.count("seed")).unwrap_or(1);
    let alphabet = r.count("alphabet").unwrap_or(2) as usize;
    if alphabet == 0 {
        r.errors.push("`alphabet` must be at least 1".into());
    }
    let transcription = r
        .choice(
            "transcription",
            |s| match s {
                "corrected" => Some(Transcription::Corrected),
                "as_printed" => Some(Transcription::AsPrinted),
                _ => None,
            },
            "corrected, as_printed",
        )
        .unwrap_or_default();
    let tol = r.number("tol").unwrap_or(rbc_core::prefme::VERIFY_TOL);
    if tol.is_nan() || tol <= 0.0 {
        r.errors.push(format!("`tol` must be positive (got {tol})"));
    }
    let doc_format = r.choice(
        "format",
        |s| match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        },
        "csv, json",
    );
    let output = cli.output.clone().or_else(|| r.string("output").map(resolve));

    if let Some(command) = command {
        let mut need = |field: &str, present: bool| {
            if !present {
                r.errors.push(format!("missing required field `{field}` for {command:?}"));
            }
        };
        match command {
            Command::Table1 => need("d", map.contains_key("d")),
            Command::Corner => {
                need("d", map.contains_key("d"));
                need("bound", map.contains_key("bound"));
            }
            Command::Region => {
                need("region", map.contains_key("region"));
                need("pmf", map.contains_key("pmf"));
            }
            Command::Project => {
                need("scheme", map.contains_key("scheme"));
                need("pmf", map.contains_key("pmf"));
            }
            Command::Verify => need("scheme", map.contains_key("scheme")),
        }
    }

    let rates = FeedbackRates::new(rfb1, rfb2).unwrap_or_else(|_| FeedbackRates::unlimited());
    match command {
        Some(command) if r.errors.is_empty() => Ok(RunConfig {
            command,
            d,
            p,
            p1,
            rates,
            bound,
            wyner_ziv,
            scheme,
            region,
            pmf,
            trials,
            seed,
            alphabet,
            transcription,
            tol,
            format: cli.format.or(doc_format).unwrap_or(command.default_format()),
            output,
        }),
        _ => Err(r.errors),
    }
}
