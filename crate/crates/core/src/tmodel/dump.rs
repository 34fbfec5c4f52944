use std::fmt::Display;
use std::io::{BufRead, Write};

use crate::config::SamplerMode;
use crate::corpus::Polarity;
use crate::error::{Error, Result};
use crate::separation::WordClass;

use super::posterior::PosteriorSummary;
use super::priors::PriorSet;
use super::sampler::SamplerState;
use super::WordKind;

const HEADER: &str = "seedtopic-model v1";

/// Everything a trained model needs for classification and reporting:
/// priors, final topic-word counts and assignments, and the averaged
/// posterior estimates. Serialized as a sectioned text file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDump {
    pub config_hash: String,
    pub mode: SamplerMode,
    pub aspects: Vec<String>,
    pub terms: Vec<String>,
    pub priors: PriorSet,
    /// Per word kind, T×V.
    pub counts: [Vec<u32>; 3],
    pub z: Vec<Vec<usize>>,
    pub y: Vec<Vec<WordClass>>,
    pub v: Vec<Vec<Polarity>>,
    pub summary: PosteriorSummary,
}

impl ModelDump {
    pub fn new(
        config_hash: String,
        mode: SamplerMode,
        aspects: Vec<String>,
        terms: Vec<String>,
        priors: PriorSet,
        state: &SamplerState,
        summary: PosteriorSummary,
    ) -> Self {
        let (t, v) = (state.num_topics(), state.vocab_size());
        let counts = WordKind::ALL.map(|k| {
            (0..t)
                .flat_map(|ti| (0..v).map(move |w| (ti, w)))
                .map(|(ti, w)| state.count(k, ti, w))
                .collect()
        });
        let docs = 0..state.num_docs();
        ModelDump {
            config_hash,
            mode,
            aspects,
            terms,
            priors,
            counts,
            z: docs.clone().map(|d| state.z(d).to_vec()).collect(),
            y: docs.clone().map(|d| state.y(d).to_vec()).collect(),
            v: docs.map(|d| state.v(d).to_vec()).collect(),
            summary,
        }
    }

    pub fn num_topics(&self) -> usize {
        self.aspects.len()
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let (t, v, d) = (self.num_topics(), self.terms.len(), self.z.len());
        writeln!(w, "{HEADER}")?;
        writeln!(w, "config_hash\t{}", self.config_hash)?;
        writeln!(w, "mode\t{}", self.mode)?;
        writeln!(w, "dims\t{t}\t{v}\t{d}")?;
        writeln!(w, "samples\t{}", self.summary.samples)?;
        writeln!(w, "alpha_base\t{}", self.priors.alpha_base())?;
        writeln!(w, "delta_base\t{}", self.priors.delta_base())?;
        row(&mut w, "aspects", &self.aspects)?;

        section(&mut w, "terms")?;
        for term in &self.terms {
            writeln!(w, "{term}")?;
        }
        section(&mut w, "beta_a")?;
        for ti in 0..t {
            values(&mut w, self.priors.beta_aspect_row(ti))?;
        }
        section(&mut w, "beta_p")?;
        values(&mut w, self.priors.beta_polarity(Polarity::Positive))?;
        section(&mut w, "beta_n")?;
        values(&mut w, self.priors.beta_polarity(Polarity::Negative))?;
        section(&mut w, "alpha")?;
        for di in 0..d {
            values(&mut w, self.priors.alpha(di))?;
        }
        section(&mut w, "delta")?;
        for di in 0..d {
            values(&mut w, &self.priors.delta(di))?;
        }
        for k in WordKind::ALL {
            section(&mut w, &format!("counts_{k}"))?;
            for r in self.counts[k.index()].chunks(v.max(1)) {
                values(&mut w, r)?;
            }
        }
        section(&mut w, "theta")?;
        for r in &self.summary.theta {
            values(&mut w, r)?;
        }
        section(&mut w, "omega")?;
        for r in &self.summary.omega {
            values(&mut w, r)?;
        }
        for k in WordKind::ALL {
            section(&mut w, &format!("phi_{k}"))?;
            for r in self.summary.phi[k.index()].chunks(v.max(1)) {
                values(&mut w, r)?;
            }
        }
        section(&mut w, "assignments")?;
        for di in 0..d {
            let z: Vec<String> = self.z[di].iter().map(|x| x.to_string()).collect();
            let y: String = self.y[di].iter().map(|c| c.to_string()).collect();
            let v: String = self.v[di]
                .iter()
                .map(|q| if *q == Polarity::Positive { 'P' } else { 'N' })
                .collect();
            writeln!(w, "{}\t{y}\t{v}", z.join(","))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R, path: &str) -> Result<Self> {
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        let mut p = Parser { lines, pos: 0, path };
        if p.next()? != HEADER {
            return Err(p.err("not a model dump"));
        }
        let config_hash = p.field("config_hash")?[0].clone();
        let mode: SamplerMode = p.field("mode")?[0].parse()?;
        let dims = p.field("dims")?;
        let [t, v, d] = [0, 1, 2].map(|i| dims.get(i).and_then(|x| x.parse::<usize>().ok()));
        let (Some(t), Some(v), Some(d)) = (t, v, d) else {
            return Err(p.err("bad dims line"));
        };
        let samples = p.scalar::<usize>("samples")?;
        let alpha_base = p.scalar::<f64>("alpha_base")?;
        let delta_base = p.scalar::<f64>("delta_base")?;
        let aspects = p.field("aspects")?;
        if aspects.len() != t {
            return Err(p.err("aspect count differs from dims"));
        }

        p.section("terms")?;
        let mut terms = Vec::with_capacity(v);
        for _ in 0..v {
            terms.push(p.next()?.to_string());
        }
        p.section("beta_a")?;
        let beta_a = p.rows::<f64>(t, v)?;
        p.section("beta_p")?;
        let beta_p = p.rows::<f64>(1, v)?.remove(0);
        p.section("beta_n")?;
        let beta_n = p.rows::<f64>(1, v)?.remove(0);
        p.section("alpha")?;
        let alpha = p.rows::<f64>(d, t)?;
        p.section("delta")?;
        let delta: Vec<[f64; 2]> = p.rows::<f64>(d, 2)?.into_iter().map(|r| [r[0], r[1]]).collect();
        let mut counts: [Vec<u32>; 3] = Default::default();
        for k in WordKind::ALL {
            p.section(&format!("counts_{k}"))?;
            counts[k.index()] = p.rows::<u32>(t, v)?.concat();
        }
        p.section("theta")?;
        let theta = p.rows::<f64>(d, t)?;
        p.section("omega")?;
        let omega = p.rows::<f64>(d, 2)?.into_iter().map(|r| [r[0], r[1]]).collect();
        let mut phi: [Vec<f64>; 3] = Default::default();
        for k in WordKind::ALL {
            p.section(&format!("phi_{k}"))?;
            phi[k.index()] = p.rows::<f64>(t, v)?.concat();
        }
        p.section("assignments")?;
        let (mut zs, mut ys, mut vs) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..d {
            let line = p.next()?.to_string();
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(p.err("expected z<TAB>y<TAB>v"));
            }
            let z = if f[0].is_empty() {
                Vec::new()
            } else {
                f[0].split(',')
                    .map(|x| x.parse::<usize>().map_err(|_| p.err("bad topic index")))
                    .collect::<Result<Vec<_>>>()?
            };
            let y = f[1]
                .chars()
                .map(|c| match c {
                    'A' => Ok(WordClass::Aspect),
                    'O' => Ok(WordClass::Opinion),
                    _ => Err(p.err("bad word class")),
                })
                .collect::<Result<Vec<_>>>()?;
            let q = f[2]
                .chars()
                .map(|c| match c {
                    'P' => Ok(Polarity::Positive),
                    'N' => Ok(Polarity::Negative),
                    _ => Err(p.err("bad polarity")),
                })
                .collect::<Result<Vec<_>>>()?;
            if y.len() != z.len() || q.len() != z.len() {
                return Err(p.err("assignment lengths differ"));
            }
            zs.push(z);
            ys.push(y);
            vs.push(q);
        }
        let priors = PriorSet::from_parts(alpha, delta, beta_a, beta_p, beta_n, alpha_base, delta_base)?;
        Ok(ModelDump {
            config_hash,
            mode,
            aspects,
            terms,
            priors,
            counts,
            z: zs,
            y: ys,
            v: vs,
            summary: PosteriorSummary {
                num_topics: t,
                vocab_size: v,
                theta,
                omega,
                phi,
                samples,
            },
        })
    }
}

fn section<W: Write>(w: &mut W, name: &str) -> Result<()> {
    writeln!(w, "[{name}]")?;
    Ok(())
}

fn row<W: Write>(w: &mut W, key: &str, xs: &[String]) -> Result<()> {
    writeln!(w, "{key}\t{}", xs.join("\t"))?;
    Ok(())
}

fn values<W: Write, T: Display>(w: &mut W, xs: &[T]) -> Result<()> {
    let mut first = true;
    for x in xs {
        if !first {
            w.write_all(b"\t")?;
        }
        write!(w, "{x}")?;
        first = false;
    }
    writeln!(w)?;
    Ok(())
}

struct Parser<'a> {
    lines: Vec<String>,
    pos: usize,
    path: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::format(self.path, self.pos.max(1), msg)
    }

    fn next(&mut self) -> Result<&str> {
        if self.pos >= self.lines.len() {
            self.pos += 1;
            return Err(self.err("unexpected end of model dump"));
        }
        self.pos += 1;
        Ok(&self.lines[self.pos - 1])
    }

    fn field(&mut self, key: &str) -> Result<Vec<String>> {
        let line = self.next()?.to_string();
        let mut parts = line.split('\t');
        if parts.next() != Some(key) {
            return Err(self.err(&format!("expected '{key}'")));
        }
        let rest: Vec<String> = parts.map(str::to_string).collect();
        if rest.is_empty() {
            return Err(self.err(&format!("'{key}' has no value")));
        }
        Ok(rest)
    }

    fn scalar<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let f = self.field(key)?;
        f[0].parse().map_err(|_| self.err(&format!("bad value for '{key}'")))
    }

    fn section(&mut self, name: &str) -> Result<()> {
        if self.next()? != format!("[{name}]") {
            return Err(self.err(&format!("expected section [{name}]")));
        }
        Ok(())
    }

    fn rows<T: std::str::FromStr>(&mut self, n: usize, width: usize) -> Result<Vec<Vec<T>>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let line = self.next()?.to_string();
            let r = if line.is_empty() {
                Vec::new()
            } else {
                line.split('\t')
                    .map(|x| x.parse::<T>().map_err(|_| self.err("bad number")))
                    .collect::<Result<Vec<T>>>()?
            };
            if r.len() != width {
                return Err(self.err(&format!("expected {width} values, got {}", r.len())));
            }
            out.push(r);
        }
        Ok(out)
    }
}
