#include "rtlab/render.hpp"

#include <sstream>
#include <stdexcept>

namespace rtlab {

namespace {

constexpr int kCell = 20;
constexpr int kLegendRow = 18;

const char* kPalette[] = {"#000000", "#e74c3c", "#3498db", "#e67e22", "#16a085", "#9b59b6"};
constexpr int kPaletteSize = 6;

const char* cell_fill(CellKind kind) {
    switch (kind) {
        case CellKind::Wall: return "#333333";
        case CellKind::Free: return "#ffffff";
        case CellKind::Start: return "#8e44ad";
        case CellKind::Goal: return "#2ecc71";
    }
    return "#ffffff";
}

}  // namespace

std::string render_svg(const TrackMap& map, const std::vector<RenderTrace>& traces) {
    for (const RenderTrace& t : traces)
        for (const auto& [x, y] : t.positions)
            if (x < -map.width || x > 2 * map.width || y < -map.height || y > 2 * map.height)
                throw std::runtime_error("trace position (" + std::to_string(x) + "," +
                                         std::to_string(y) + ") does not fit map '" + map.id + "'");

    const int width = map.width * kCell;
    const int height = map.height * kCell + static_cast<int>(traces.size()) * kLegendRow + 4;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";

    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            svg << "<rect x=\"" << x * kCell << "\" y=\"" << y * kCell << "\" width=\"" << kCell
                << "\" height=\"" << kCell << "\" fill=\"" << cell_fill(map.at(x, y))
                << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";

    for (std::size_t i = 0; i < traces.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (const auto& [x, y] : traces[i].positions) {
            if (!first) svg << ' ';
            svg << x * kCell + kCell / 2 << ',' << y * kCell + kCell / 2;
            first = false;
        }
        svg << "\"/>\n";
    }

    for (std::size_t i = 0; i < traces.size(); ++i) {
        const int ly = map.height * kCell + static_cast<int>(i) * kLegendRow + 14;
        svg << "<line x1=\"4\" y1=\"" << ly - 4 << "\" x2=\"24\" y2=\"" << ly - 4 << "\" stroke=\""
            << kPalette[i % kPaletteSize] << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"30\" y=\"" << ly << "\" font-family=\"monospace\" font-size=\"12\">"
            << traces[i].label << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace rtlab
