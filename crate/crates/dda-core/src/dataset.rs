//! Labeled image collections and the pure dataset manipulations: grayscale
//! replication, target synthesis from a patch bank, and class-balanced
//! subsampling. File ingestion lives in the companion crate.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::rng::{stream, stream_rng};
use crate::NUM_CLASSES;

/// Which side of the adaptation a dataset belongs to. Training may only see
/// source labels; target labels ride along for evaluation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    Source,
    Target,
}

/// An ordered collection of images with digit labels and a domain tag.
#[derive(Debug, Clone)]
pub struct Dataset {
    images: Vec<ImageTensor>,
    labels: Vec<u8>,
    domain: DomainTag,
    name: String,
}

impl Dataset {
    pub fn new(
        images: Vec<ImageTensor>,
        labels: Vec<u8>,
        domain: DomainTag,
        name: impl Into<String>,
    ) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::BadLength {
                expected: images.len(),
                got: labels.len(),
            });
        }
        if let Some(first) = images.first() {
            let expected = first.geometry();
            for (i, img) in images.iter().enumerate() {
                if img.geometry() != expected {
                    return Err(Error::ImageGeometry {
                        index: i,
                        expected,
                        got: img.geometry(),
                    });
                }
            }
        }
        for (i, &label) in labels.iter().enumerate() {
            if label as usize >= NUM_CLASSES {
                return Err(Error::LabelOutOfRange { index: i, label });
            }
        }
        Ok(Dataset {
            images,
            labels,
            domain,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Common (height, width, channels); errors on an empty dataset.
    pub fn geometry(&self) -> Result<(usize, usize, usize)> {
        self.images
            .first()
            .map(ImageTensor::geometry)
            .ok_or(Error::EmptyDataset)
    }

    #[inline]
    pub fn image(&self, index: usize) -> &ImageTensor {
        &self.images[index]
    }

    #[inline]
    pub fn label(&self, index: usize) -> u8 {
        self.labels[index]
    }

    pub fn images(&self) -> &[ImageTensor] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same images and labels under a different tag/name; used when a
    /// synthesized set switches roles.
    pub fn retagged(mut self, domain: DomainTag, name: impl Into<String>) -> Self {
        self.domain = domain;
        self.name = name.into();
        self
    }

    /// Order-sensitive FNV-1a over the label sequence; lets tests assert that
    /// transformations keep (image, label) pairing intact.
    pub fn label_checksum(&self) -> u64 {
        let mut hash = 0xcbf2_9ce4_8422_2325u64;
        for &label in &self.labels {
            hash ^= label as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        hash
    }
}

/// Background patches for target synthesis: 3-channel, digit geometry,
/// values in [0, 1].
#[derive(Debug, Clone)]
pub struct PatchBank {
    patches: Vec<ImageTensor>,
    origin: String,
}

impl PatchBank {
    pub fn new(patches: Vec<ImageTensor>, origin: impl Into<String>) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let expected = patches[0].geometry();
        for (i, p) in patches.iter().enumerate() {
            if p.geometry() != expected {
                return Err(Error::ImageGeometry {
                    index: i,
                    expected,
                    got: p.geometry(),
                });
            }
            let (min, max) = p.min_max();
            if !(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max) {
                return Err(Error::InvalidConfig {
                    what: "patch values must lie in [0, 1]",
                });
            }
        }
        if expected.2 != 3 {
            return Err(Error::InvalidConfig {
                what: "patches must have 3 channels",
            });
        }
        Ok(PatchBank {
            patches,
            origin: origin.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch(&self, index: usize) -> &ImageTensor {
        &self.patches[index]
    }

    pub fn patches(&self) -> &[ImageTensor] {
        &self.patches
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }
}

/// Replicates a single-channel dataset into three identical channels.
pub fn to_rgb(d: &Dataset) -> Result<Dataset> {
    let (_, _, channels) = d.geometry()?;
    if channels != 1 {
        return Err(Error::AlreadyMultiChannel { channels });
    }
    let images = d
        .images
        .iter()
        .map(|img| {
            let p = img.plane(0);
            ImageTensor::new(alloc::vec![p.clone(), p.clone(), p.clone()])
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(images, d.labels.clone(), d.domain, d.name.clone())
}

/// Blends each digit with a uniformly drawn patch, channel by channel, as
/// `|patch − digit|`; labels are preserved and the draw is deterministic
/// given the seed.
pub fn synthesize_target(d: &Dataset, bank: &PatchBank, seed: u64) -> Result<Dataset> {
    let geom = d.geometry()?;
    if geom.2 != 3 {
        return Err(Error::GeometryMismatch {
            expected: (geom.0, geom.1, 3),
            got: geom,
        });
    }
    let bank_geom = bank.patches[0].geometry();
    if bank_geom != geom {
        return Err(Error::GeometryMismatch {
            expected: geom,
            got: bank_geom,
        });
    }
    let images = d
        .images
        .iter()
        .enumerate()
        .map(|(i, img)| {
            let mut rng = stream_rng(seed, &[stream::SYNTH_TARGET, i as u64]);
            let patch = bank.patch(rng.gen_range(0..bank.len()));
            ImageTensor::from_fn(geom.0, geom.1, 3, |ch, r, c| {
                (patch.at(ch, r, c) - img.at(ch, r, c)).abs()
            })
        })
        .collect();
    Dataset::new(
        images,
        d.labels.clone(),
        DomainTag::Target,
        d.name.clone(),
    )
}

/// Class-balanced subsample of exactly `n_per_class` members per label,
/// without replacement, deterministic given the seed. Selected indices are
/// emitted in their original order.
pub fn subsample(d: &Dataset, n_per_class: usize, seed: u64) -> Result<Dataset> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut per_class: Vec<Vec<usize>> = (0..NUM_CLASSES).map(|_| Vec::new()).collect();
    for (i, &label) in d.labels.iter().enumerate() {
        per_class[label as usize].push(i);
    }
    for (label, members) in per_class.iter().enumerate() {
        if members.len() < n_per_class {
            return Err(Error::InsufficientClass {
                label: label as u8,
                available: members.len(),
                requested: n_per_class,
            });
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(n_per_class * NUM_CLASSES);
    for (label, members) in per_class.iter_mut().enumerate() {
        let mut rng = stream_rng(seed, &[stream::SUBSAMPLE, label as u64]);
        // Partial Fisher-Yates: the first n_per_class slots become the draw.
        let len = members.len();
        for slot in 0..n_per_class {
            let pick = slot + rng.gen_range(0..len - slot);
            members.swap(slot, pick);
        }
        chosen.extend_from_slice(&members[..n_per_class]);
    }
    chosen.sort_unstable();
    let images = chosen.iter().map(|&i| d.images[i].clone()).collect();
    let labels = chosen.iter().map(|&i| d.labels[i]).collect();
    Dataset::new(images, labels, d.domain, d.name.clone())
}
