"""
Command implementations of the ``seisforge`` CLI.

Each command takes a resolved ``RunConfig``, writes its artifacts under the
configured output directory together with ``resolved_config.json``, and
returns the path of its primary artifact.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from seisforge.cli.config import RunConfig
from seisforge.cli.plotting import Panel, parse_floors, save_figure
from seisforge.errors import ConfigError
from seisforge.formats import kvtree
from seisforge.formats.response_file import write_response_csv
from seisforge.model.config import SrfdConfig
from seisforge.physics.dynamics import IntegratorParams, ResponseHistory, sdr_response, simulate
from seisforge.physics.ground_motion import GroundMotion, load_record, resample
from seisforge.physics.identification import (
    IdentificationMethod,
    IdentificationProblem,
    identify_stiffness,
    validate_period,
)
from seisforge.physics.structure import BuildingConfig, Direction, LumpedMassModel, reduce_to_mdof
from seisforge.training.config import GenerationConfig, TrainConfig
from seisforge.training.dataset import MANIFEST_NAME, Dataset, Split, build_dataset
from seisforge.training.finetune import finetune_lora
from seisforge.training.metrics import compute_metrics
from seisforge.training.normalization import story_vectors
from seisforge.training.rollout import ResponsePredictor, evaluate
from seisforge.training.trainer import train

# Logger
logger = logging.getLogger("seisforge.cli.commands")

QUANTITY_UNITS = {"displacement": "u (m)", "acceleration": "a (m/s$^2$)"}


def load_model(path: str, role: str = "sdr_model", direction: str = "x", damping_ratio: float = 0.05) -> LumpedMassModel:
    """
    Load a lumped-mass model from a document.

    Accepts a model document, a dataset model document (picking ``role``)
    or a building document (reduced along ``direction``).
    """
    document = kvtree.read_document(path)
    if "masses_kg" in document:
        return LumpedMassModel.from_document(document, str(path))
    if role in document:
        return LumpedMassModel.from_document(document[role], f"{path}:{role}")
    building = BuildingConfig.from_document(document.get("building", document), str(path))
    return reduce_to_mdof(building, Direction(direction), damping_ratio)


def _motion_at(path: str, dt: Optional[float], allow_resample: bool) -> GroundMotion:
    gm = load_record(path)
    if dt is None or math.isclose(gm.dt, dt, rel_tol=1e-12):
        return gm
    if not allow_resample:
        raise ConfigError(f"{path}: record dt {gm.dt} differs from {dt}; pass --resample", key="dt")
    logger.info(f"Resampling {path} from dt={gm.dt} to dt={dt}")
    return resample(gm, dt)


def _write_response(out: Path, stem: str, r: ResponseHistory) -> Path:
    path = out / f"{stem}.sfrh"
    path.write_bytes(r.to_bytes())
    write_response_csv(out / f"{stem}_displacement.csv", r.dt, r.u, label="u")
    write_response_csv(out / f"{stem}_velocity.csv", r.dt, r.v, label="v")
    write_response_csv(out / f"{stem}_acceleration.csv", r.dt, r.a, label="a")
    return path


def _floor_panels(
    time: np.ndarray,
    floors: List[int],
    reference: Optional[ResponseHistory],
    predicted: Optional[ResponseHistory],
    title: str = "",
) -> List[Panel]:
    panels = []
    for floor in floors:
        for name, attr in (("displacement", "u"), ("acceleration", "a")):
            panels.append(
                Panel(
                    title=f"{title}floor {floor} {name}",
                    ylabel=QUANTITY_UNITS[name],
                    time=time,
                    reference=getattr(reference, attr)[floor - 1] if reference is not None else None,
                    predicted=getattr(predicted, attr)[floor - 1] if predicted is not None else None,
                )
            )
    return panels


def cmd_gen(run: RunConfig) -> Path:
    """Generate a dataset; returns the manifest path."""
    cfg = GenerationConfig.from_document(run["generation"])
    run.tree["generation"] = cfg.to_document()
    run.write()
    build_dataset(cfg, run.seed, run.out_dir, run.get("workers"))
    return run.out_dir / MANIFEST_NAME


def cmd_simulate(run: RunConfig) -> Path:
    """Simulate a building under a record; returns the response file."""
    model = load_model(run.require("building"), "oracle_model", run["direction"], run["damping_ratio"])
    gm = _motion_at(run.require("motion"), run.get("dt"), bool(run["resample"]))
    presets = {
        "average_acceleration": IntegratorParams.average_acceleration,
        "linear_acceleration": IntegratorParams.linear_acceleration,
    }
    if run["integrator"] not in presets:
        raise ConfigError(f"unknown integrator '{run['integrator']}'", key="integrator")
    params = presets[run["integrator"]](gm.dt)
    floors = parse_floors(run["floors"], model.n_stories) if run["plot"] else []

    out = run.out_dir
    run.write()
    response = simulate(model, gm, params)
    path = _write_response(out, "response", response)
    sdr = None
    if run["sdr"]:
        sdr = sdr_response(model, gm, params)
        _write_response(out, "sdr", sdr)
    if floors:
        panels = _floor_panels(gm.time, floors, response, sdr)
        for panel in panels:
            panel.reference_label, panel.predicted_label = "response", "sdr"
        for floor in floors:
            selected = [p for p in panels if p.title.startswith(f"floor {floor} ")]
            save_figure(out / f"floor_{floor}.svg", selected)
    logger.info(f"Simulated {model.n_stories}-story model for {gm.n_steps} steps into {out}")
    return path


def cmd_identify(run: RunConfig) -> Path:
    """Identify story stiffnesses from a reference response; returns the model document."""
    model = load_model(run.require("model"))
    reference_path = Path(run.require("reference"))
    if not reference_path.is_file():
        raise ConfigError(f"reference response not found: {reference_path}", key="reference")
    reference = ResponseHistory.from_bytes(reference_path.read_bytes())
    gm = _motion_at(run.require("motion"), reference.dt, False)
    factor = float(run["bounds_factor"])
    if not factor > 1:
        raise ConfigError("'bounds_factor' must exceed 1", key="bounds_factor")
    guess = model.story_stiffness
    problem = IdentificationProblem(
        masses=model.masses,
        reference=reference,
        excitation=gm,
        initial_guess=guess,
        bounds=(guess / factor, guess * factor),
        damping_ratio=model.damping_ratio,
    )
    try:
        method = IdentificationMethod(run["method"])
    except ValueError as e:
        raise ConfigError(f"unknown identification method '{run['method']}'", key="method") from e
    out = run.out_dir
    run.write()
    result = identify_stiffness(
        problem,
        method,
        budget=int(run["budget"]),
        seed=run.seed,
        workers=run.get("workers"),
    )
    identified = problem.model(result.stiffness)
    if run.get("target_period") is not None:
        identified = validate_period(identified, float(run["target_period"]), float(run["period_tolerance"]))
    kvtree.write_document(out / "identification.json", result.to_document())
    return kvtree.write_document(out / "identified_model.json", identified.to_document())


def cmd_train(run: RunConfig) -> Path:
    """Train a base decoder; returns the checkpoint path."""
    model_cfg = SrfdConfig.from_document(run["model"], "model")
    train_cfg = TrainConfig.from_document(run["training"], "training")
    dataset = Dataset(run.require("dataset"))
    run.tree["model"] = model_cfg.to_document()
    run.tree["training"] = train_cfg.to_document()
    run.write()
    return train(model_cfg, train_cfg, dataset, run.seed, run.out_dir).checkpoint


def cmd_finetune(run: RunConfig) -> Path:
    """Fine-tune low-rank adapters; returns the adapter file."""
    train_cfg = TrainConfig.from_document(run["training"], "training")
    checkpoint = run.require("checkpoint")
    dataset = Dataset(run.require("dataset"))
    run.tree["training"] = train_cfg.to_document()
    run.write()
    result = finetune_lora(
        checkpoint,
        dataset,
        rank=int(run["rank"]),
        alpha=float(run["alpha"]),
        seed=run.seed,
        train_cfg=train_cfg,
        out_dir=run.out_dir,
        split=run["split"],
        sample_ids=run.get("samples"),
    )
    return result.adapters


def _channel_metrics(
    predictor: ResponsePredictor,
    predicted: np.ndarray,
    reference: ResponseHistory,
    n_stories: int,
) -> Dict[str, Any]:
    target = predictor.stats.response_channels(reference.u, reference.a, predictor.n_max)
    n_max = predictor.n_max
    metrics = {}
    for q, name in enumerate(("displacement", "acceleration")):
        block = slice(q * n_max, q * n_max + n_stories)
        metrics[name] = compute_metrics(predicted[:, block], target[:, block]).to_document()
    return metrics


def cmd_predict(run: RunConfig) -> Path:
    """Predict a response history with a checkpoint; returns the prediction file."""
    predictor = ResponsePredictor.from_checkpoint(run.require("checkpoint"), run.get("adapter"))
    model = load_model(run.require("model"), "sdr_model", run["direction"])
    # capacity check before any file is written
    story_vectors(model, predictor.n_max)
    gm = _motion_at(run.require("motion"), predictor.dt, bool(run["resample"]))
    reference_model = None
    if run.get("reference") is not None:
        reference_model = load_model(run["reference"], "oracle_model", run["direction"])
    floors = parse_floors(run["floors"], model.n_stories) if run["plot"] else []

    out = run.out_dir
    run.write()
    channels = predictor.predict_channels(model, gm)
    u, a = predictor.stats.split_channels(channels, model.n_stories, predictor.n_max)
    v = np.gradient(u, gm.dt, axis=1) if gm.n_steps > 1 else np.zeros_like(u)
    prediction = ResponseHistory(dt=gm.dt, u=u, v=v, a=a)
    path = _write_response(out, "prediction", prediction)

    reference = None
    if reference_model is not None:
        reference = simulate(reference_model, gm, IntegratorParams.average_acceleration(gm.dt))
        metrics = _channel_metrics(predictor, channels, reference, model.n_stories)
        kvtree.write_document(out / "metrics.json", {"motion": gm.id, "quantities": metrics})
        logger.info(
            "Prediction vs reference: "
            + ", ".join(f"{q} r={m['r']:.3f}" for q, m in metrics.items())
        )
    for floor in floors:
        save_figure(out / f"floor_{floor}.svg", _floor_panels(gm.time, [floor], reference, prediction))
    return path


def _sibling(dataset: Dataset, sample_id: str) -> List[str]:
    """The sample and its counterparts in the other directions, x first."""
    records = {r.sample_id: r for r in dataset.manifest.samples}
    record = records[sample_id]
    group = [
        r for r in dataset.manifest.samples
        if r.building_id == record.building_id and r.motion_id == record.motion_id
    ]
    return [r.sample_id for r in sorted(group, key=lambda r: r.direction)]


def cmd_evaluate(run: RunConfig) -> Path:
    """Evaluate a checkpoint on a dataset split; returns the text report."""
    predictor = ResponsePredictor.from_checkpoint(run.require("checkpoint"), run.get("adapter"))
    dataset = Dataset(run.require("dataset"))
    split = Split(run["split"]).value
    if not dataset.manifest.in_split(split):
        raise ConfigError(f"split '{split}' is empty", key="split")

    out = run.out_dir
    run.write()
    report = evaluate(
        predictor,
        dataset,
        split,
        worst_k=int(run["worst_k"]),
        limit=run.get("limit"),
        workers=run.get("workers"),
    )
    path = out / "report.txt"
    path.write_text(report.render_text(), encoding="utf-8")
    report.write_csv(out / "report.csv")
    kvtree.write_document(out / "report.json", report.to_document())

    if run["plot"]:
        for case in report.worst_cases:
            panels: List[Panel] = []
            for sample_id in _sibling(dataset, case.sample_id):
                sample = dataset.sample(sample_id)
                predicted = predictor.predict(sample.model, sample.motion)
                top = sample.model.n_stories
                panels.extend(
                    _floor_panels(sample.motion.time, [top], sample.oracle, predicted, title=f"{sample.direction}: ")
                )
            save_figure(out / "figures" / f"{case.sample_id}.svg", panels, columns=2)
    return path


COMMAND_HANDLERS = {
    "gen": cmd_gen,
    "simulate": cmd_simulate,
    "identify": cmd_identify,
    "train": cmd_train,
    "finetune": cmd_finetune,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
}
