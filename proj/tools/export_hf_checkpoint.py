# Copyright 2026 The factcheck Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Export a Hugging Face BERT/RoBERTa encoder for the C++ transformer backend.

Writes config.json, vocab.txt, tensors.json and tensors.bin (little-endian
float32) into the output directory.

    python tools/export_hf_checkpoint.py vinai/phobert-base --out ckpt/phobert
"""

import argparse
import json
import os
import struct
import sys

WANTED_EMBEDDINGS = [
    "embeddings.word_embeddings.weight",
    "embeddings.position_embeddings.weight",
    "embeddings.token_type_embeddings.weight",
    "embeddings.LayerNorm.weight",
    "embeddings.LayerNorm.bias",
]

WANTED_LAYER = [
    "attention.self.query.weight",
    "attention.self.query.bias",
    "attention.self.key.weight",
    "attention.self.key.bias",
    "attention.self.value.weight",
    "attention.self.value.bias",
    "attention.output.dense.weight",
    "attention.output.dense.bias",
    "attention.output.LayerNorm.weight",
    "attention.output.LayerNorm.bias",
    "intermediate.dense.weight",
    "intermediate.dense.bias",
    "output.dense.weight",
    "output.dense.bias",
    "output.LayerNorm.weight",
    "output.LayerNorm.bias",
]


def guess_scheme(tokenizer):
    name = type(tokenizer).__name__
    if "Bert" in name and "Pho" not in name:
        return "wordpiece"
    if "Pho" in name:
        return "bpe_suffix"
    return "sentencepiece"


def strip_prefix(state):
    out = {}
    for key, value in state.items():
        for prefix in ("bert.", "roberta.", "model."):
            if key.startswith(prefix):
                key = key[len(prefix):]
                break
        out[key] = value
    return out


def export(model, vocab, out_dir, scheme, cls_token, sep_token, unk_token,
           split_punctuation=True):
    """Write `model` (a BertModel/RobertaModel-like module) and `vocab`
    (list of tokens indexed by id) to out_dir."""
    cfg = model.config
    state = strip_prefix(model.state_dict())
    names = list(WANTED_EMBEDDINGS)
    for layer in range(cfg.num_hidden_layers):
        names += ["encoder.layer.%d.%s" % (layer, n) for n in WANTED_LAYER]

    os.makedirs(out_dir, exist_ok=True)
    index = {}
    offset = 0
    with open(os.path.join(out_dir, "tensors.bin"), "wb") as f:
        for name in names:
            if name not in state:
                raise KeyError("model has no tensor %r" % name)
            t = state[name].detach().to("cpu").float().contiguous()
            flat = t.reshape(-1).tolist()
            f.write(struct.pack("<%df" % len(flat), *flat))
            index[name] = {"offset": offset, "shape": list(t.shape)}
            offset += len(flat)
    with open(os.path.join(out_dir, "tensors.json"), "w") as f:
        json.dump(index, f, indent=1)

    pad = getattr(cfg, "pad_token_id", None)
    is_roberta = "roberta" in getattr(cfg, "model_type", "")
    config = {
        "hidden_size": cfg.hidden_size,
        "num_hidden_layers": cfg.num_hidden_layers,
        "num_attention_heads": cfg.num_attention_heads,
        "intermediate_size": cfg.intermediate_size,
        "max_position_embeddings": cfg.max_position_embeddings,
        "type_vocab_size": cfg.type_vocab_size,
        "position_offset": (pad + 1) if is_roberta and pad is not None else 0,
        "layer_norm_eps": cfg.layer_norm_eps,
        "subword_scheme": scheme,
        "cls_token": cls_token,
        "sep_token": sep_token,
        "unk_token": unk_token,
        "split_punctuation": split_punctuation,
    }
    if getattr(cfg, "hidden_act", "gelu") != "gelu":
        print("warning: hidden_act %r; the backend implements erf GELU" % cfg.hidden_act,
              file=sys.stderr)
    with open(os.path.join(out_dir, "config.json"), "w") as f:
        json.dump(config, f, indent=2)
    with open(os.path.join(out_dir, "vocab.txt"), "w", encoding="utf-8") as f:
        for token in vocab:
            f.write(token.replace("\n", " ") + "\n")


def vocab_list(tokenizer):
    by_id = {i: t for t, i in tokenizer.get_vocab().items()}
    size = max(by_id) + 1
    return [by_id.get(i, "[gap-%d]" % i) for i in range(size)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model", help="hub id or local directory")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--scheme", choices=["wordpiece", "sentencepiece", "bpe_suffix"],
                    help="subword scheme (default: guessed from the tokenizer)")
    args = ap.parse_args()

    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(args.model)
    model = AutoModel.from_pretrained(args.model).eval()
    export(model, vocab_list(tokenizer), args.out, args.scheme or guess_scheme(tokenizer),
           tokenizer.cls_token, tokenizer.sep_token, tokenizer.unk_token)
    print("wrote %s" % args.out)


if __name__ == "__main__":
    main()
