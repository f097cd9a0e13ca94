//! Turns raw KDD Cup 1999 connection records into the 122-column numeric
//! matrix the loader expects.
//!
//! The three symbolic fields (protocol, service, flag) are one-hot encoded
//! over fixed vocabularies; the other 38 fields are copied as numbers. Rows
//! labelled `normal.` become the anomalous class (label 1) and every attack
//! becomes the normal class (label 0).
//!
//! ```text
//! cargo run --release -p gan-ensemble-cli --example kdd99_preprocess -- \
//!     kddcup.data_10_percent kdd99_20k.csv --rows 20000 --seed 0
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PROTOCOLS: [&str; 3] = ["icmp", "tcp", "udp"];

const SERVICES: [&str; 70] = [
    "IRC", "X11", "Z39_50", "aol", "auth", "bgp", "courier", "csnet_ns", "ctf", "daytime", "discard", "domain",
    "domain_u", "echo", "eco_i", "ecr_i", "efs", "exec", "finger", "ftp", "ftp_data", "gopher", "harvest",
    "hostnames", "http", "http_2784", "http_443", "http_8001", "imap4", "iso_tsap", "klogin", "kshell", "ldap",
    "link", "login", "mtp", "name", "netbios_dgm", "netbios_ns", "netbios_ssn", "netstat", "nnsp", "nntp",
    "ntp_u", "other", "pm_dump", "pop_2", "pop_3", "printer", "private", "red_i", "remote_job", "rje", "shell",
    "smtp", "sql_net", "ssh", "sunrpc", "supdup", "systat", "telnet", "tftp_u", "tim_i", "time", "urh_i", "urp_i",
    "uucp", "uucp_path", "vmnet", "whois",
];

const FLAGS: [&str; 11] = ["OTH", "REJ", "RSTO", "RSTOS0", "RSTR", "S0", "S1", "S2", "S3", "SF", "SH"];

const RAW_FIELDS: usize = 42;
const SYMBOLIC: [usize; 3] = [1, 2, 3];
const WIDTH: usize = RAW_FIELDS - 1 - SYMBOLIC.len() + PROTOCOLS.len() + SERVICES.len() + FLAGS.len();

#[derive(Parser)]
struct Args {
    /// Raw comma-separated records, 41 fields plus the label.
    input: PathBuf,
    output: PathBuf,
    /// Keep a uniform random subset of this many rows.
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn one_hot(vocab: &[&str], value: &str, field: &str) -> Result<Vec<f64>> {
    let k = vocab
        .iter()
        .position(|v| *v == value)
        .with_context(|| format!("unknown {field} {value:?}"))?;
    Ok((0..vocab.len()).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
}

/// Numeric row and label for one raw record.
fn encode(fields: &[&str]) -> Result<(Vec<f64>, u8)> {
    if fields.len() != RAW_FIELDS {
        bail!("expected {RAW_FIELDS} fields, got {}", fields.len());
    }
    let mut row = Vec::with_capacity(WIDTH);
    for (k, f) in fields[..RAW_FIELDS - 1].iter().enumerate() {
        if !SYMBOLIC.contains(&k) {
            row.push(f.trim().parse::<f64>().with_context(|| format!("field {k}: {f:?}"))?);
        }
    }
    row.extend(one_hot(&PROTOCOLS, fields[1], "protocol")?);
    row.extend(one_hot(&SERVICES, fields[2], "service")?);
    row.extend(one_hot(&FLAGS, fields[3], "flag")?);
    let label = fields[RAW_FIELDS - 1].trim().trim_end_matches('.');
    Ok((row, (label == "normal") as u8))
}

fn convert<R: Read, W: Write>(input: R, out: W, rows: Option<usize>, seed: u64) -> Result<usize> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut encoded = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().collect();
        encoded.push(encode(&fields).with_context(|| format!("line {}", line + 1))?);
    }
    if let Some(n) = rows.filter(|&n| n < encoded.len()) {
        let mut idx: Vec<usize> = (0..encoded.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(n);
        idx.sort_unstable();
        encoded = idx.into_iter().map(|i| std::mem::take(&mut encoded[i])).collect();
    }
    let mut w = csv::Writer::from_writer(out);
    let header = (0..WIDTH).map(|k| format!("f{k}")).chain(["label".to_string()]);
    w.write_record(header)?;
    for (row, label) in &encoded {
        w.write_record(row.iter().map(f64::to_string).chain([label.to_string()]))?;
    }
    w.flush()?;
    Ok(encoded.len())
}

fn main() -> Result<()> {
    let args = Args::parse();
    let input = BufReader::new(File::open(&args.input).with_context(|| format!("{}", args.input.display()))?);
    let out = BufWriter::new(File::create(&args.output)?);
    let n = convert(input, out, args.rows, args.seed)?;
    eprintln!("wrote {n} rows of {WIDTH} features to {}", args.output.display());
    Ok(())
}
