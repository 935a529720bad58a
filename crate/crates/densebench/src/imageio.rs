//! PNG images: RGB, 8- or 16-bit in, 16-bit out.

use std::path::Path;

use densebench_core::{FrameCoord, ImageFrame, Raster};

use crate::error::{self, Error, Result};

pub fn decode_png(bytes: &[u8], path: &Path) -> Result<Raster> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder.read_info().map_err(|e| Error::decode(path, e))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::decode(path, e))?;
    if info.color_type != png::ColorType::Rgb {
        return Err(Error::decode(path, format!("expected RGB, found {:?}", info.color_type)));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let data: Vec<f32> = match info.bit_depth {
        png::BitDepth::Eight => buf[..info.buffer_size()].iter().map(|&v| v as f32 / 255.0).collect(),
        png::BitDepth::Sixteen => buf[..info.buffer_size()]
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / 65535.0)
            .collect(),
        d => return Err(Error::decode(path, format!("unsupported bit depth {d:?}"))),
    };
    Ok(Raster { width: w, height: h, data })
}

/// 16-bit RGB PNG; samples are clipped and rounded to `k / 65535`.
pub fn encode_png(r: &Raster) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, r.width as u32, r.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc.write_header().expect("writing to a Vec cannot fail");
        let samples: Vec<u8> = r
            .data
            .iter()
            .flat_map(|&v| ((v.clamp(0.0, 1.0) as f64 * 65535.0).round() as u16).to_be_bytes())
            .collect();
        writer.write_image_data(&samples).expect("buffer size matches the header");
    }
    out
}

pub fn read_image(path: &Path, coord: FrameCoord) -> Result<ImageFrame> {
    let raster = decode_png(&error::read(path)?, path)?;
    ImageFrame::new(raster.width, raster.height, raster.data, coord).map_err(|e| Error::in_file(path, e))
}

pub fn write_image(frame: &ImageFrame, path: &Path) -> Result<()> {
    error::write(path, &encode_png(frame.raster()))
}
