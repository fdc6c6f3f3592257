"""Regenerates crates/core/data/demo_vectors.txt.

The table is tiny and synthetic: words are grouped into a few functional
clusters (causal, contrastive, additive, conclusive, thesis, temporal) and
each word vector is its cluster centroid plus seeded noise. It exists so that
embedding-based metrics can be tested deterministically; it is not a
substitute for real pre-trained vectors.
"""
import numpy as np

DIM = 16
CLUSTERS = {
    "causal": "because since given as due owing reason for cause why",
    "contrast": "however although though even but yet nevertheless nonetheless conversely contrast "
                "instead while whereas despite still unlike otherwise regardless admittedly granted contrary",
    "additive": "moreover furthermore addition additionally also besides indeed fact example instance "
                "likewise similarly firstly secondly first second well particular specifically",
    "conclusive": "therefore thus hence consequently result so accordingly conclusion overall finally "
                  "clearly obviously summary short conclude follows means shows",
    "thesis": "i think believe opinion view my personally mind convinced feel argue agree perspective",
    "temporal": "when then after before meanwhile until once afterwards later eventually next now",
    "function": "the a an of to in on that is it and or we should not be this with by from at they "
                "their its are was were has have do does must can will other hand what more top",
    "content": "humanity embrace clean energy order fight climate change ecological concerns add further "
               "strain economy carbon taxes introduce abolish sugar taxing unhealthy products reduces "
               "obesity saves lives such hit poor families harder than anyone else online hate speech "
               "laws adopt repeal vulnerable groups need protection organized harassment vague rules let "
               "governments silence legitimate criticism self-driving cars public roads allow ban machines "
               "get tired distracted behind wheel software fails unusual traffic situations school "
               "uniforms require remove visible differences family income students lose important way "
               "express identity rains people cars pollution",
}

rng = np.random.default_rng(20230)
rows = []
seen = set()
for name, words in CLUSTERS.items():
    centroid = rng.normal(size=DIM)
    centroid /= np.linalg.norm(centroid)
    spread = 0.9 if name == "content" else 0.3
    for w in words.split():
        if w in seen:
            continue
        seen.add(w)
        v = centroid + spread * rng.normal(size=DIM) / np.sqrt(DIM)
        rows.append((w, v))

with open("crates/core/data/demo_vectors.txt", "w") as f:
    f.write(f"{len(rows)} {DIM}\n")
    for w, v in rows:
        f.write(w + " " + " ".join(f"{x:.4f}" for x in v) + "\n")
print(len(rows))
