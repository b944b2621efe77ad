"""Speech corpus balancing and demographic bias audit toolkit."""

from ._core import (
    AudioClip,
    BalancePlan,
    InfeasibleError,
    InputError,
    ManifestEntry,
    PitchTrack,
    __version__,
    add_reverb,
    align,
    apply_augment_json,
    cer,
    classify_band,
    corpus_stats,
    decode_wav,
    dft_magnitude,
    encode_wav,
    estimate_pitch,
    evaluate_classifier,
    execute_balance,
    group_metrics,
    inject_noise,
    load_wav,
    mixdown,
    parse_manifest,
    pitch_shift,
    plan_balance,
    probe_wav,
    resample,
    save_wav,
    segment_clip,
    spectrogram,
    time_features,
    time_stretch,
    wer,
    write_manifest,
)

__all__ = [
    "AudioClip",
    "BalancePlan",
    "InfeasibleError",
    "InputError",
    "ManifestEntry",
    "PitchTrack",
    "__version__",
    "add_reverb",
    "align",
    "apply_augment_json",
    "cer",
    "classify_band",
    "corpus_stats",
    "decode_wav",
    "dft_magnitude",
    "encode_wav",
    "estimate_pitch",
    "evaluate_classifier",
    "execute_balance",
    "group_metrics",
    "inject_noise",
    "load_wav",
    "mixdown",
    "parse_manifest",
    "pitch_shift",
    "plan_balance",
    "probe_wav",
    "resample",
    "save_wav",
    "segment_clip",
    "spectrogram",
    "time_features",
    "time_stretch",
    "wer",
    "write_manifest",
]
