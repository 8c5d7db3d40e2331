"""Command-line entry point.

Subcommands: gen, taste, mine, eval, atlas, cfg, run. The default data
root (used when --out is omitted) is $PFMLAB_DATA_DIR, falling back to
./pfmlab_data. Exit codes: 0 success, 2 validation/config error, 1
runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .atlas import AtlasStore, ContextVector, RequirementVector, ingest
from .atlas import (query_eateries, query_effect_by_food, query_food_by_effect,
                    query_recipes_by_requirements)
from .counterfactual import (CfgSettings, CounterfactualDataset, IdMap,
                             apply_restrictions, cfg_rank, emit_counterfactuals,
                             emit_templates, idmap_for_dataset, score_options)
from .cre import OptionList, cre_options
from .errors import PfmlabError, ValidationError
from .experiments import (ExperimentConfig, run, run_rq1, run_rq2, run_rq3)
from .jsonutil import read_json, write_json
from .lifelog import EventStream, generate, load_profiles, default_profiles
from .mining import EventPattern, generate_hypotheses, verify_hypothesis
from .personal import PersonalVector, personal_vector, validate_directives
from .taste import MoleculeTable, TasteDataset, build_taste_dataset, bundled_taste_dataset


def data_root() -> Path:
    return Path(os.environ.get("PFMLAB_DATA_DIR", "pfmlab_data"))


def _out_dir(args, default_name: str) -> Path:
    out = Path(args.out) if args.out else data_root() / default_name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _taste(args) -> TasteDataset:
    if getattr(args, "taste", None):
        return TasteDataset.from_json(args.taste)
    return bundled_taste_dataset()


def _stream(args) -> EventStream:
    return EventStream.read(args.stream)


def cmd_gen(args) -> int:
    profiles = load_profiles(args.profiles) if args.profiles else default_profiles()
    stream = generate(profiles, args.days, _taste(args), args.seed)
    out = _out_dir(args, "stream")
    stream.write(out)
    print(f"wrote {len(stream.events)} events "
          f"({sum(1 for e in stream.events if e.kind == 'meal')} meals) to {out}")
    return 0


def cmd_taste_build(args) -> int:
    table = MoleculeTable.from_csv(args.molecules)
    doc = read_json(args.recipes)
    recipes = doc["recipes"] if isinstance(doc, dict) else doc
    assignments = {r["dish_id"]: (r["meal_type"], r["weight_class"]) for r in recipes}
    dataset = build_taste_dataset(recipes, assignments, table)
    out = Path(args.out) if args.out else data_root() / "taste_dataset.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.to_json(out)
    print(f"wrote {len(dataset.dishes)} dishes to {out}")
    return 0


def cmd_mine_generate(args) -> int:
    split = {}
    for spec in args.split or []:
        kind, _, path = spec.partition("=")
        split[kind] = path
    heatmap = generate_hypotheses(_stream(args),
                                  input_kinds=args.inputs.split(","),
                                  outcome_kinds=args.outcomes.split(","),
                                  window_hours=args.window,
                                  split_fields=split or None)
    out = _out_dir(args, "mine")
    heatmap.to_csv(out / "cooccurrence_heatmap.csv")
    write_json(out / "heatmap.json", heatmap.to_records())
    print(f"wrote {len(heatmap.cells)} heatmap cells to {out}")
    return 0


def cmd_mine_verify(args) -> int:
    pattern = EventPattern.from_record(read_json(args.pattern))
    rule = verify_hypothesis(_stream(args), pattern,
                             min_group_size=args.min_group_size,
                             alpha=args.alpha, bonferroni=args.bonferroni)
    out = _out_dir(args, "mine")
    write_json(out / "verified_rule.json", rule.to_record())
    print(f"verdict: {rule.verdict} ({rule.direction}); report in {out}")
    return 0


def cmd_eval(args) -> int:
    stream = _stream(args)
    taste = _taste(args)
    out = _out_dir(args, args.which)
    if args.which == "rq1":
        metrics = run_rq1(stream, taste, out)
    elif args.which == "rq2":
        metrics = run_rq2(stream, taste, out)
    else:
        metrics = run_rq3(stream, taste, out)
    write_json(out / "metrics.json", metrics)
    print(f"wrote {args.which} metrics to {out}")
    return 0


def cmd_atlas_ingest(args) -> int:
    from .jsonutil import read_jsonl
    records = []
    for path in args.records:
        records.extend(read_jsonl(path))
    store, report = ingest(records)
    out = _out_dir(args, "atlas")
    store.export(out)
    write_json(out / "rejections.json", report.rejected)
    print(f"ingested {len(store)} entities, rejected {len(report)}; exported to {out}")
    return 0


def _load_store(args) -> AtlasStore:
    store, report = AtlasStore.read(args.store)
    if len(report):
        raise ValidationError(f"store at {args.store} has {len(report)} invalid records")
    return store


def cmd_atlas_query(args) -> int:
    store = _load_store(args)
    req = RequirementVector(
        exclude_ingredients=tuple(args.exclude or ()),
        max_nutrients=tuple((k, float(v)) for k, v in
                            (spec.split("=", 1) for spec in args.max_nutrient or ())),
        diet_tags=tuple(args.diet or ()))
    if args.which in ("food-by-effect", "eateries"):
        if args.lat is None or args.lon is None:
            raise ValidationError(f"{args.which} query needs --lat/--lon")
        context = ContextVector(lat=args.lat, lon=args.lon,
                                radius_km=args.radius_km,
                                deny_ingredients=tuple(args.exclude or ()),
                                diet_tags=tuple(args.diet or ()))
    if args.which == "food-by-effect":
        if not args.effect:
            raise ValidationError("--effect is required")
        result = query_food_by_effect(store, args.effect, context)
    elif args.which == "effects":
        if not args.food:
            raise ValidationError("--food is required")
        result = query_effect_by_food(store, args.food)
    elif args.which == "recipes":
        result = query_recipes_by_requirements(store, req)
    else:
        result = query_eateries(store, req, context)
    out = Path(args.out) if args.out else None
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_json(out, result)
        print(f"wrote {len(result)} results to {out}")
    else:
        print(json.dumps(result, indent=1, sort_keys=True))
    return 0


def _personal_from_args(args, stream, taste) -> PersonalVector:
    if getattr(args, "personal", None):
        return PersonalVector.from_record(read_json(args.personal))
    person = args.person or stream.person_ids()[0]
    meals = stream.meals(person)
    if not meals:
        raise ValidationError(f"no meals for person {person!r}")
    directives = (validate_directives(read_json(args.directives))
                  if getattr(args, "directives", None) else None)
    return personal_vector(stream, person, meals[-1].start, taste,
                           directives=directives)


def cmd_cfg_rank(args) -> int:
    settings = CfgSettings.from_json(args.settings)
    personal = PersonalVector.from_record(read_json(args.personal))
    option_list = OptionList.from_record(read_json(args.options))
    kept = apply_restrictions(option_list.options, settings.restriction_list)
    ranking = cfg_rank(score_options(kept, personal, settings), settings)
    result = {"top_choice": ranking.top.option.option_id,
              "ordering": ranking.ordered_ids(),
              "batch_size": ranking.batch_size,
              "primary": ranking.primary, "secondary": ranking.secondary}
    out = Path(args.out) if args.out else data_root() / "cfg_ranking.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_json(out, result)
    print(f"top choice {result['top_choice']}; ranking in {out}")
    return 0


def cmd_cfg_emit(args) -> int:
    stream = _stream(args)
    taste = _taste(args)
    settings = CfgSettings.from_json(args.settings)
    personal = _personal_from_args(args, stream, taste)

    def cre(label):
        return cre_options(personal, None, n=args.n_options, mode="random_sample",
                           taste_dataset=taste, seed=args.seed, query_label=label)

    dataset = emit_counterfactuals(stream, cre, settings, personal,
                                   args.n_samples, args.seed)
    out = Path(args.out) if args.out else data_root() / "counterfactuals.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.write(out)
    print(f"emitted {len(dataset.samples)} samples "
          f"(skipped {dataset.skipped_all_restricted}) to {out}")
    return 0


def cmd_cfg_templates(args) -> int:
    dataset = CounterfactualDataset.read(args.samples)
    id_map = (IdMap.from_record(read_json(args.idmap)) if args.idmap
              else idmap_for_dataset(dataset))
    records = emit_templates(dataset.samples, args.category, id_map,
                             effect_tag=args.effect)
    out = Path(args.out) if args.out else data_root() / f"templates_{args.category}.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(records) + ("\n" if records else ""))
    idmap_path = out.with_suffix(".idmap.json")
    write_json(idmap_path, id_map.to_record())
    print(f"wrote {len(records)} template records to {out} (ids in {idmap_path})")
    return 0


def cmd_run(args) -> int:
    if args.config:
        rec = read_json(args.config)
        if args.experiment:
            rec["experiment"] = args.experiment
        if args.seed is not None:
            rec["seed"] = args.seed
        config = ExperimentConfig(
            experiment=rec["experiment"], seed=rec.get("seed", 42),
            days=rec.get("days", 500), profiles_path=rec.get("profiles_path"),
            taste_path=rec.get("taste_path"), overrides=rec.get("overrides", {}))
    else:
        if not args.experiment:
            raise ValidationError("either --config or --experiment is required")
        config = ExperimentConfig(experiment=args.experiment,
                                  seed=args.seed if args.seed is not None else 42,
                                  days=args.days)
    out = _out_dir(args, config.experiment)
    run(config, out)
    print(f"experiment {config.experiment} complete; outputs in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfmlab",
        description="Deterministic contextual food-recommendation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_default=42):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", default=None)

    p = sub.add_parser("gen", help="generate a synthetic event stream")
    p.add_argument("--profiles", default=None)
    p.add_argument("--days", type=int, default=500)
    p.add_argument("--taste", default=None)
    add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("taste", help="taste dataset tools")
    tsub = p.add_subparsers(dest="taste_command", required=True)
    tb = tsub.add_parser("build", help="build a taste dataset from CSV + recipes")
    tb.add_argument("--molecules", required=True)
    tb.add_argument("--recipes", required=True)
    tb.add_argument("--out", default=None)
    tb.set_defaults(func=cmd_taste_build)

    p = sub.add_parser("mine", help="event mining")
    msub = p.add_subparsers(dest="mine_command", required=True)
    mg = msub.add_parser("generate", help="co-occurrence heatmap")
    mg.add_argument("--stream", required=True)
    mg.add_argument("--inputs", default="stress_report,weather_report")
    mg.add_argument("--outcomes", default="meal")
    mg.add_argument("--window", type=float, default=16.5)
    mg.add_argument("--split", action="append", default=None,
                    metavar="KIND=FIELD.PATH")
    mg.add_argument("--out", default=None)
    mg.set_defaults(func=cmd_mine_generate)
    mv = msub.add_parser("verify", help="verify a pattern under matching")
    mv.add_argument("--pattern", required=True)
    mv.add_argument("--stream", required=True)
    mv.add_argument("--min-group-size", type=int, default=5)
    mv.add_argument("--alpha", type=float, default=0.05)
    mv.add_argument("--bonferroni", action="store_true")
    mv.add_argument("--out", default=None)
    mv.set_defaults(func=cmd_mine_verify)

    p = sub.add_parser("eval", help="preference-model evaluations")
    p.add_argument("which", choices=("rq1", "rq2", "rq3"))
    p.add_argument("--stream", required=True)
    p.add_argument("--taste", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("atlas", help="food atlas store and queries")
    asub = p.add_subparsers(dest="atlas_command", required=True)
    ai = asub.add_parser("ingest", help="validate and index entity records")
    ai.add_argument("--records", nargs="+", required=True)
    ai.add_argument("--out", default=None)
    ai.set_defaults(func=cmd_atlas_ingest)
    aq = asub.add_parser("query", help="run one of the query classes")
    aq.add_argument("--class", dest="which", required=True,
                    choices=("food-by-effect", "effects", "recipes", "eateries"))
    aq.add_argument("--store", required=True)
    aq.add_argument("--effect", default=None)
    aq.add_argument("--food", default=None)
    aq.add_argument("--lat", type=float, default=None)
    aq.add_argument("--lon", type=float, default=None)
    aq.add_argument("--radius-km", type=float, default=10.0)
    aq.add_argument("--exclude", action="append", default=None)
    aq.add_argument("--diet", action="append", default=None)
    aq.add_argument("--max-nutrient", action="append", default=None,
                    metavar="FIELD=MAX")
    aq.add_argument("--out", default=None)
    aq.set_defaults(func=cmd_atlas_query)

    p = sub.add_parser("cfg", help="counterfactual ranking tools")
    csub = p.add_subparsers(dest="cfg_command", required=True)
    cr = csub.add_parser("rank", help="rank an option list")
    cr.add_argument("--settings", required=True)
    cr.add_argument("--personal", required=True)
    cr.add_argument("--options", required=True)
    cr.add_argument("--out", default=None)
    cr.set_defaults(func=cmd_cfg_rank)
    ce = csub.add_parser("emit", help="emit counterfactual training samples")
    ce.add_argument("--stream", required=True)
    ce.add_argument("--taste", default=None)
    ce.add_argument("--settings", required=True)
    ce.add_argument("--personal", default=None)
    ce.add_argument("--person", default=None)
    ce.add_argument("--directives", default=None)
    ce.add_argument("--n-samples", type=int, default=1000)
    ce.add_argument("--n-options", type=int, default=20)
    add_common(ce, seed_default=0)
    ce.set_defaults(func=cmd_cfg_emit)
    ct = csub.add_parser("templates", help="render fine-tuning template records")
    ct.add_argument("--samples", required=True)
    ct.add_argument("--category", required=True,
                    choices=("sequential", "star_rating", "yes_no"))
    ct.add_argument("--idmap", default=None)
    ct.add_argument("--effect", default="improves_sleep_quality")
    ct.add_argument("--out", default=None)
    ct.set_defaults(func=cmd_cfg_templates)

    p = sub.add_parser("run", help="run a packaged experiment")
    p.add_argument("--experiment", choices=("rq1", "rq2", "rq3", "cfg_eval",
                                            "mine_demo"), default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--days", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except PfmlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
