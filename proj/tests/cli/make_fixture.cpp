// Writes the synthetic two-region image and its ground truth into a directory.
#include <filesystem>
#include <iostream>

#include "spsg/image.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: spsg_fixture <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  spsg::write_png_rgb((dir / "two.png").string(), synthetic::two_region_image());

  const auto gt = synthetic::two_region_truth();
  spsg::GrayPlane plane{64, 64, 16, {gt.begin(), gt.end()}};
  spsg::write_png_gray16((dir / "two_gt.png").string(), plane);
  return 0;
}
