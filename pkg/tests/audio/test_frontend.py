# -*- coding: utf-8 -*-
"""
音频前端单元测试
降混、STFT、梅尔投影、对数压缩与 WAV 读写
"""

import os
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import soundfile as sf

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..'))

from src.audio.frontend import (
    ComputeLogMel, Downmix, LogCompress, MelCenterFrequencies, MelFilterbank, MelProject, StftMagnitude
)
from src.audio.interfaces import (
    AudioClip, AudioFormatError, AudioValueError, CANONICAL_SAMPLE_RATE, EXCERPT_LENGTH, N_MELS
)
from src.audio.wav_io import ReadWav, WriteWav


#region 基础测试类

class TestFrontend(unittest.TestCase):
    """前端测试基类"""

    def setUp(self):
        self.rng = np.random.default_rng(0)

    def _Sine(self, frequency, seconds=1.0, sampleRate=CANONICAL_SAMPLE_RATE):
        t = np.arange(int(seconds * sampleRate)) / sampleRate
        return AudioClip(0.5 * np.sin(2 * np.pi * frequency * t), sampleRate, "sine")

#endregion


#region 降混

class TestDownmix(TestFrontend):
    """多声道降混"""

    def test_Downmix_取平均(self):
        clip = Downmix(np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 1.0]]))
        np.testing.assert_allclose(clip.Samples, [0.5, 0.0, 0.0])

    def test_Downmix_单声道恒等(self):
        samples = self.rng.normal(size=100).astype(np.float32)
        np.testing.assert_array_equal(Downmix(samples[None, :]).Samples, samples)

    def test_Downmix_长度不一致报错(self):
        with self.assertRaises(AudioValueError):
            Downmix([np.zeros(3), np.zeros(4)])

    def test_AudioClip_空片段报错(self):
        with self.assertRaises(AudioValueError):
            AudioClip(np.zeros(0))

#endregion


#region 频谱

class TestSpectrogram(TestFrontend):
    """STFT、梅尔投影与对数压缩"""

    def test_ComputeLogMel_标准节选形状(self):
        """600000 个样本 → [1361, 81]"""
        clip = AudioClip(self.rng.normal(scale=0.1, size=EXCERPT_LENGTH))
        spec = ComputeLogMel(clip)
        self.assertEqual(spec.Values.shape, (1361, N_MELS))
        self.assertAlmostEqual(spec.FrameRate, 100.0)

    def test_StftMagnitude_帧数公式(self):
        for length in (1, 441, 1024, 1025, 44100):
            clip = AudioClip(np.ones(length) * 0.1)
            self.assertEqual(StftMagnitude(clip).shape, (1 + length // 441, 1025))

    def test_StftMagnitude_正弦峰值在对应频点(self):
        """1 kHz 正弦的幅度峰值落在 round(1000 * 2048 / 44100) 号频点"""
        magnitude = StftMagnitude(self._Sine(1000.0))
        peakBin = int(np.argmax(magnitude[magnitude.shape[0] // 2]))
        self.assertEqual(peakBin, round(1000.0 * 2048 / 44100))

    def test_MelFilterbank_形状与峰值(self):
        bank = MelFilterbank()
        self.assertEqual(bank.shape, (81, 1025))
        self.assertFalse(bank.flags.writeable)
        self.assertTrue(np.all(bank >= 0))
        self.assertTrue(np.all(bank.max(axis=1) > 0))

    def test_MelCenterFrequencies_单调递增且在范围内(self):
        centers = MelCenterFrequencies()
        self.assertEqual(centers.size, 81)
        self.assertTrue(np.all(np.diff(centers) > 0))
        self.assertGreater(centers[0], 30.0)
        self.assertLess(centers[-1], 17000.0)

    def test_MelProject_能量集中在最近的梅尔带(self):
        """5 kHz 正弦的最大梅尔带中心最接近 5 kHz"""
        mel = MelProject(StftMagnitude(self._Sine(5000.0)))
        centers = MelCenterFrequencies()
        band = int(np.argmax(mel[mel.shape[0] // 2]))
        nearest = int(np.argmin(np.abs(centers - 5000.0)))
        self.assertLessEqual(abs(band - nearest), 1)

    def test_MelProject_频点数错误报错(self):
        with self.assertRaises(AudioValueError):
            MelProject(np.zeros((10, 1024)))

    def test_LogCompress_log1p且零映射为零(self):
        spec = LogCompress(np.array([[0.0, np.e - 1.0]]))
        np.testing.assert_allclose(spec.Values, [[0.0, 1.0]], rtol=1e-6)

    def test_LogCompress_负值报错(self):
        with self.assertRaises(AudioValueError):
            LogCompress(np.array([[-1.0]]))

    def test_ComputeLogMel_非标准采样率报错(self):
        with self.assertRaises(AudioValueError):
            ComputeLogMel(AudioClip(np.zeros(1000), 22050))

#endregion


#region WAV 读写

class TestWavIo(TestFrontend):
    """WAV 读写"""

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_WriteWav_ReadWav_保留波形(self):
        clip = self._Sine(440.0, 0.5)
        path = self.dir / "sub" / "tone.wav"
        WriteWav(path, clip)
        loaded = ReadWav(path)
        self.assertEqual(loaded.ClipId, "tone")
        self.assertEqual(loaded.Length, clip.Length)
        np.testing.assert_allclose(loaded.Samples, clip.Samples, atol=1e-4)

    def test_ReadWav_立体声降混并重采样(self):
        """22.05 kHz 立体声 → 44.1 kHz 单声道，时长不变"""
        stereo = np.stack([np.full(22050, 0.2), np.full(22050, 0.4)], axis=1)
        path = self.dir / "stereo.wav"
        sf.write(str(path), stereo, 22050, subtype='PCM_16')
        clip = ReadWav(path)
        self.assertEqual(clip.SampleRate, CANONICAL_SAMPLE_RATE)
        self.assertEqual(clip.Length, 44100)
        self.assertAlmostEqual(float(np.median(clip.Samples)), 0.3, places=2)

    def test_ReadWav_非WAV报错(self):
        path = self.dir / "noise.wav"
        path.write_bytes(b"not a wave file at all")
        with self.assertRaises(AudioFormatError):
            ReadWav(path)

    def test_ReadWav_非WAV容器报错(self):
        path = self.dir / "tone.flac"
        sf.write(str(path), np.zeros(1000), 44100, format='FLAC')
        with self.assertRaises(AudioFormatError):
            ReadWav(path)

#endregion


if __name__ == '__main__':
    unittest.main()
