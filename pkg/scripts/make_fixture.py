"""Regenerate the bundled 40-row schema-compatible CSV fixture.

The values are synthetic. MemoryComplaints is tied to the label so the
fixture exercises the feature-ranking path end to end.
"""
import csv
import sys
from pathlib import Path

import numpy as np

from qmlbench.dataio import load_schema

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "src" / "qmlbench" / "data" / "alzheimers_fixture.csv"

BINARY = {
    "Gender", "Smoking", "FamilyHistoryAlzheimers", "CardiovascularDisease", "Diabetes",
    "Depression", "HeadInjury", "Hypertension", "MemoryComplaints", "BehavioralProblems",
    "Confusion", "Disorientation", "PersonalityChanges", "DifficultyCompletingTasks",
    "Forgetfulness",
}
RANGES = {
    "Age": (60, 90), "Ethnicity": (0, 3), "EducationLevel": (0, 3), "BMI": (15, 40),
    "AlcoholConsumption": (0, 20), "PhysicalActivity": (0, 10), "DietQuality": (0, 10),
    "SleepQuality": (4, 10), "SystolicBP": (90, 180), "DiastolicBP": (60, 120),
    "CholesterolTotal": (150, 300), "CholesterolLDL": (50, 200), "CholesterolHDL": (20, 100),
    "CholesterolTriglycerides": (50, 400), "MMSE": (0, 30), "FunctionalAssessment": (0, 10),
    "ADL": (0, 10),
}
INTEGER = {"Age", "Ethnicity", "EducationLevel"}


def main(rows: int = 40, seed: int = 2149) -> None:
    schema = load_schema()
    rng = np.random.default_rng(seed)
    diagnosis = np.array([1] * (rows // 2) + [0] * (rows - rows // 2))
    rng.shuffle(diagnosis)
    header = ["PatientID", *schema.feature_columns, "Diagnosis", "DoctorInCharge"]
    with open(OUT, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in range(rows):
            y = int(diagnosis[r])
            record = [4751 + r]
            for col in schema.feature_columns:
                if col == "MemoryComplaints":
                    flip = rng.random() < 0.1
                    record.append(y ^ int(flip))
                elif col in BINARY:
                    record.append(int(rng.random() < 0.3))
                elif col in INTEGER:
                    lo, hi = RANGES[col]
                    record.append(int(rng.integers(lo, hi + 1)))
                else:
                    lo, hi = RANGES[col]
                    record.append(round(float(rng.uniform(lo, hi)), 6))
            record += [y, "XXXConfid"]
            w.writerow(record)
    print(f"wrote {rows} rows to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
