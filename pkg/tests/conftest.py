import os

# the acceptance runs spawn the CLI; keep the worker pool bounded on small machines
os.environ.setdefault("FRACYAM_THREADS", "1")
