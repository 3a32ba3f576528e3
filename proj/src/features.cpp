#include "repboot/features.hpp"

#include <algorithm>
#include <set>

#include "repboot/errors.hpp"

namespace repboot {

int FeatureColumn::tag_code(const std::string& tag) const {
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] == tag) return static_cast<int>(i);
    }
    return -1;
}

FeatureMatrix::FeatureMatrix(FeatureSpace space, int lvl_count)
    : space_(std::move(space)), lvl_count_(lvl_count) {
    if (lvl_count_ < 2) throw ConfigError("lvl_count must be at least 2");
}

void FeatureMatrix::add_row(const std::vector<FeatureCell>& cells,
                            const std::vector<std::string>& cell_tags, int label) {
    if (cells.size() != col_count() || cell_tags.size() != col_count()) {
        throw ConfigError("row width does not match the feature space");
    }
    if (label < 1 || label > lvl_count_) throw DomainError("label out of [1, lvl_count]");
    for (std::size_t c = 0; c < cells.size(); ++c) {
        FeatureCell cell = cells[c];
        if (cell.present) {
            auto& column = space_.columns[c];
            int code = column.tag_code(cell_tags[c]);
            if (code < 0) {
                column.tags.push_back(cell_tags[c]);
                code = static_cast<int>(column.tags.size()) - 1;
            }
            cell.tag = code;
        }
        cells_.push_back(cell);
    }
    labels_.push_back(label);
}

namespace {

FeatureSpace atomic_space(const IndicatorSchema& schema) {
    FeatureSpace space;
    space.layout = FeatureLayout::Atomic;
    for (const auto& id : schema.indicators()) {
        space.columns.push_back({id.key(), id.layer, {}});
        space.indicator_keys.push_back(id.key());
    }
    return space;
}

void encode_record_into(const FeatureSpace& space, std::size_t column_offset,
                        const std::vector<IndicatorId>& indicators,
                        const ServiceRecord& record, std::vector<FeatureCell>& cells,
                        std::vector<std::string>* tags) {
    for (std::size_t i = 0; i < indicators.size(); ++i) {
        auto it = record.indicators.find(indicators[i]);
        std::size_t c = column_offset + i;
        if (it == record.indicators.end()) continue;
        FeatureCell& cell = cells[c];
        cell.present = true;
        cell.rating = it->second.rating;
        if (tags) {
            (*tags)[c] = it->second.type_tag;
        } else {
            cell.tag = space.columns[c].tag_code(it->second.type_tag);
        }
    }
}

}  // namespace

FeatureMatrix build_atomic_matrix(const IndicatorSchema& schema,
                                  const std::vector<const ServiceRecord*>& rows,
                                  int lvl_count) {
    if (rows.empty()) throw ConfigError("no service rows to build a matrix from");
    FeatureMatrix matrix(atomic_space(schema), lvl_count);
    const auto& indicators = schema.indicators();
    for (const ServiceRecord* record : rows) {
        if (!record->observed_level) {
            throw ConfigError("service " + record->service_id +
                              " has no observed_level; cannot use it for training");
        }
        std::vector<FeatureCell> cells(indicators.size());
        std::vector<std::string> tags(indicators.size());
        encode_record_into(matrix.space(), 0, indicators, *record, cells, &tags);
        matrix.add_row(cells, tags, *record->observed_level);
    }
    return matrix;
}

FeatureMatrix build_concat_matrix(const IndicatorSchema& schema,
                                  const std::vector<const CompositionSample*>& samples,
                                  int lvl_count) {
    if (samples.empty()) throw ConfigError("no samples to build a matrix from");

    std::vector<std::string> service_ids;
    for (const auto& svc : samples[0]->topology.services) {
        service_ids.push_back(svc.service_id);
    }
    std::sort(service_ids.begin(), service_ids.end());

    FeatureSpace space;
    space.layout = FeatureLayout::Concatenated;
    space.service_ids = service_ids;
    for (const auto& sid : service_ids) {
        for (const auto& id : schema.indicators()) {
            space.columns.push_back({sid + "|" + id.key(), id.layer, {}});
            space.indicator_keys.push_back(id.key());
        }
    }

    FeatureMatrix matrix(std::move(space), lvl_count);
    const auto& indicators = schema.indicators();
    for (const CompositionSample* sample : samples) {
        if (sample->topology.services.size() != service_ids.size()) {
            throw ConfigError("mixed component arity in the sample set");
        }
        if (!sample->observed_level) {
            throw ConfigError("training sample without an observed_level");
        }
        std::vector<FeatureCell> cells(matrix.col_count());
        std::vector<std::string> tags(matrix.col_count());
        for (std::size_t s = 0; s < service_ids.size(); ++s) {
            int idx = sample->topology.index_of_service(service_ids[s]);
            if (idx < 0) {
                throw ConfigError("sample is missing service " + service_ids[s] +
                                  " expected by the concatenated layout");
            }
            encode_record_into(matrix.space(), s * indicators.size(), indicators,
                               sample->topology.services[idx], cells, &tags);
        }
        matrix.add_row(cells, tags, *sample->observed_level);
    }
    return matrix;
}

FeatureMatrix build_numeric_matrix(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<int>& labels, int lvl_count) {
    if (rows.size() != labels.size()) throw ConfigError("rows/labels size mismatch");
    if (rows.empty()) throw ConfigError("no rows to build a matrix from");
    FeatureSpace space;
    space.layout = FeatureLayout::Numeric;
    for (const auto& name : names) space.columns.push_back({name, Layer::Insight, {}});
    FeatureMatrix matrix(std::move(space), lvl_count);
    std::vector<std::string> tags(names.size(), kUnknownTypeTag);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != names.size()) throw ConfigError("numeric row width mismatch");
        std::vector<FeatureCell> cells(names.size());
        for (std::size_t c = 0; c < names.size(); ++c) {
            cells[c].present = true;
            cells[c].rating = rows[r][c];
        }
        matrix.add_row(cells, tags, labels[r]);
    }
    return matrix;
}

std::vector<FeatureCell> encode_service_row(const FeatureSpace& space,
                                            const ServiceRecord& record) {
    if (space.layout != FeatureLayout::Atomic) {
        throw ConfigError("feature space does not take single service rows");
    }
    std::vector<FeatureCell> cells(space.width());
    std::vector<IndicatorId> indicators;
    indicators.reserve(space.width());
    for (const auto& key : space.indicator_keys) indicators.push_back(IndicatorId::from_key(key));
    encode_record_into(space, 0, indicators, record, cells, nullptr);
    return cells;
}

std::vector<FeatureCell> encode_concat_row(const FeatureSpace& space,
                                           const CompositionTopology& topology) {
    if (space.layout != FeatureLayout::Concatenated) {
        throw ConfigError("feature space does not take composition rows");
    }
    if (topology.services.size() != space.service_ids.size()) {
        throw ConfigError("sample arity does not match the trained layout");
    }
    std::size_t per_service = space.width() / space.service_ids.size();
    std::vector<IndicatorId> indicators;
    for (std::size_t i = 0; i < per_service; ++i) {
        indicators.push_back(IndicatorId::from_key(space.indicator_keys[i]));
    }
    std::vector<FeatureCell> cells(space.width());
    for (std::size_t s = 0; s < space.service_ids.size(); ++s) {
        int idx = topology.index_of_service(space.service_ids[s]);
        if (idx < 0) {
            throw ConfigError("sample is missing service " + space.service_ids[s]);
        }
        encode_record_into(space, s * per_service, indicators, topology.services[idx], cells,
                           nullptr);
    }
    return cells;
}

std::vector<FeatureCell> encode_numeric_row(const FeatureSpace& space,
                                            const std::vector<double>& values) {
    if (space.layout != FeatureLayout::Numeric) {
        throw ConfigError("feature space does not take numeric rows");
    }
    if (values.size() != space.width()) throw ConfigError("numeric row width mismatch");
    std::vector<FeatureCell> cells(space.width());
    for (std::size_t c = 0; c < values.size(); ++c) {
        cells[c].present = true;
        cells[c].rating = values[c];
    }
    return cells;
}

std::vector<std::vector<int>> layer_column_subsets(const FeatureSpace& space) {
    std::vector<std::vector<int>> groups;
    for (Layer layer : {Layer::Provider, Layer::Community, Layer::SimilarService,
                        Layer::Insight}) {
        std::vector<int> cols;
        for (std::size_t c = 0; c < space.columns.size(); ++c) {
            if (space.columns[c].layer == layer) cols.push_back(static_cast<int>(c));
        }
        if (!cols.empty()) groups.push_back(std::move(cols));
    }
    return groups;
}

}  // namespace repboot
