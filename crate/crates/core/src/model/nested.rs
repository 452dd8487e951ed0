//! Nested index arrays of a fixed depth.
//!
//! CityJSON stores geometry boundaries (and the semantic, material and texture
//! arrays that run parallel to them) as JSON arrays nested 1 to 5 levels deep,
//! the depth being fixed by the geometry type. [`Nested`] keeps that shape
//! typed so the hot loops never go through `serde_json::Value`.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, DeserializeSeed, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq)]
pub enum Nested<T> {
    Depth1(Vec<T>),
    Depth2(Vec<Vec<T>>),
    Depth3(Vec<Vec<Vec<T>>>),
    Depth4(Vec<Vec<Vec<Vec<T>>>>),
    Depth5(Vec<Vec<Vec<Vec<Vec<T>>>>>),
}

impl<T> Nested<T> {
    pub fn depth(&self) -> usize {
        match self {
            Nested::Depth1(_) => 1,
            Nested::Depth2(_) => 2,
            Nested::Depth3(_) => 3,
            Nested::Depth4(_) => 4,
            Nested::Depth5(_) => 5,
        }
    }

    /// Calls `f` on every innermost list (a ring, for surface boundaries).
    pub fn for_each_innermost<'a>(&'a self, mut f: impl FnMut(&'a [T])) {
        match self {
            Nested::Depth1(a) => f(a),
            Nested::Depth2(a) => a.iter().for_each(|x| f(x)),
            Nested::Depth3(a) => a.iter().flatten().for_each(|x| f(x)),
            Nested::Depth4(a) => a.iter().flatten().flatten().for_each(|x| f(x)),
            Nested::Depth5(a) => a.iter().flatten().flatten().flatten().for_each(|x| f(x)),
        }
    }

    pub fn for_each_innermost_mut(&mut self, mut f: impl FnMut(&mut [T])) {
        match self {
            Nested::Depth1(a) => f(a),
            Nested::Depth2(a) => a.iter_mut().for_each(|x| f(x)),
            Nested::Depth3(a) => a.iter_mut().flatten().for_each(|x| f(x)),
            Nested::Depth4(a) => a.iter_mut().flatten().flatten().for_each(|x| f(x)),
            Nested::Depth5(a) => a
                .iter_mut()
                .flatten()
                .flatten()
                .flatten()
                .for_each(|x| f(x)),
        }
    }

    pub fn for_each_leaf<'a>(&'a self, mut f: impl FnMut(&'a T)) {
        self.for_each_innermost(|xs| xs.iter().for_each(&mut f));
    }

    /// Leaves in document order.
    pub fn leaves(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.for_each_leaf(|x| out.push(x));
        out
    }

    pub fn innermost(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        self.for_each_innermost(|xs| out.push(xs));
        out
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.for_each_innermost(|xs| n += xs.len());
        n
    }

    /// Rebuilds the same shape with every leaf passed through `f`.
    pub fn try_map<U, E>(&self, mut f: impl FnMut(&T) -> Result<U, E>) -> Result<Nested<U>, E> {
        let f = &mut f;
        Ok(match self {
            Nested::Depth1(a) => Nested::Depth1(map1(a, f)?),
            Nested::Depth2(a) => Nested::Depth2(map2(a, f)?),
            Nested::Depth3(a) => Nested::Depth3(map3(a, f)?),
            Nested::Depth4(a) => Nested::Depth4(a.iter().map(|x| map3(x, f)).collect::<Result<_, _>>()?),
            Nested::Depth5(a) => Nested::Depth5(
                a.iter()
                    .map(|x| x.iter().map(|y| map3(y, f)).collect::<Result<_, _>>())
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    /// Lengths of the first `levels` levels, in pre-order. Two arrays with
    /// equal outlines have the same structure down to that level.
    pub fn outline(&self, levels: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match self {
            Nested::Depth1(a) => outline1(a, levels, &mut out),
            Nested::Depth2(a) => outline2(a, levels, &mut out),
            Nested::Depth3(a) => outline3(a, levels, &mut out),
            Nested::Depth4(a) => {
                if levels > 0 {
                    out.push(a.len());
                    a.iter().for_each(|x| outline3(x, levels - 1, &mut out));
                }
            }
            Nested::Depth5(a) => {
                if levels > 0 {
                    out.push(a.len());
                    for x in a {
                        if levels > 1 {
                            out.push(x.len());
                            x.iter().for_each(|y| outline3(y, levels - 2, &mut out));
                        }
                    }
                }
            }
        }
        out
    }
}

fn map1<T, U, E>(a: &[T], f: &mut impl FnMut(&T) -> Result<U, E>) -> Result<Vec<U>, E> {
    a.iter().map(f).collect()
}

fn map2<T, U, E>(a: &[Vec<T>], f: &mut impl FnMut(&T) -> Result<U, E>) -> Result<Vec<Vec<U>>, E> {
    a.iter().map(|x| map1(x, f)).collect()
}

fn map3<T, U, E>(
    a: &[Vec<Vec<T>>],
    f: &mut impl FnMut(&T) -> Result<U, E>,
) -> Result<Vec<Vec<Vec<U>>>, E> {
    a.iter().map(|x| map2(x, f)).collect()
}

fn outline1<T>(a: &[T], levels: usize, out: &mut Vec<usize>) {
    if levels > 0 {
        out.push(a.len());
    }
}

fn outline2<T>(a: &[Vec<T>], levels: usize, out: &mut Vec<usize>) {
    if levels > 0 {
        out.push(a.len());
        a.iter().for_each(|x| outline1(x, levels - 1, out));
    }
}

fn outline3<T>(a: &[Vec<Vec<T>>], levels: usize, out: &mut Vec<usize>) {
    if levels > 0 {
        out.push(a.len());
        a.iter().for_each(|x| outline2(x, levels - 1, out));
    }
}

impl<T: Serialize> Serialize for Nested<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Nested::Depth1(a) => a.serialize(serializer),
            Nested::Depth2(a) => a.serialize(serializer),
            Nested::Depth3(a) => a.serialize(serializer),
            Nested::Depth4(a) => a.serialize(serializer),
            Nested::Depth5(a) => a.serialize(serializer),
        }
    }
}

/// Deserializes a [`Nested`] whose depth is known from context.
pub(crate) struct NestedSeed<T> {
    depth: usize,
    marker: PhantomData<T>,
}

impl<T> NestedSeed<T> {
    pub(crate) fn new(depth: usize) -> Self {
        NestedSeed {
            depth,
            marker: PhantomData,
        }
    }
}

impl<'de, T: Deserialize<'de>> DeserializeSeed<'de> for NestedSeed<T> {
    type Value = Nested<T>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        Ok(match self.depth {
            1 => Nested::Depth1(Deserialize::deserialize(d)?),
            2 => Nested::Depth2(Deserialize::deserialize(d)?),
            3 => Nested::Depth3(Deserialize::deserialize(d)?),
            4 => Nested::Depth4(Deserialize::deserialize(d)?),
            5 => Nested::Depth5(Deserialize::deserialize(d)?),
            n => return Err(de::Error::custom(format_args!("unsupported nesting depth {n}"))),
        })
    }
}

impl<T: fmt::Display> fmt::Display for Nested<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "depth-{} array of {} indices", self.depth(), self.leaf_count())
    }
}
